use std::fmt::Write;

use crate::catalog::SkinTone;
use crate::similarity::ToneMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Palette {
    /// White to blue over `[0, max]`.
    Sequential,
    /// Blue through white to red, centred at 0 and symmetric in `max |v|`.
    Diverging,
}

const CELL_W: usize = 84;
const CELL_H: usize = 44;
const LEFT: usize = 120;
const TOP: usize = 64;

const LOW: (f64, f64, f64) = (33.0, 102.0, 172.0);
const MID: (f64, f64, f64) = (247.0, 247.0, 247.0);
const HIGH: (f64, f64, f64) = (178.0, 24.0, 43.0);

fn mix(a: (f64, f64, f64), b: (f64, f64, f64), t: f64) -> String {
    let c = |x: f64, y: f64| (x + (y - x) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

/// Cell label: three decimals with trailing zeros removed.
pub fn cell_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Deterministic 6×6 heatmap with each value printed in its cell.
pub fn render_heatmap(matrix: &ToneMatrix, palette: Palette, title: &str) -> String {
    let n = SkinTone::ALL.len();
    let scale = matrix
        .values
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let width = LEFT + n * CELL_W + 16;
    let height = TOP + n * CELL_H + 40;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    s.push_str(
        "<defs><pattern id=\"hatch\" width=\"8\" height=\"8\" patternUnits=\"userSpaceOnUse\" patternTransform=\"rotate(45)\">\
<rect width=\"8\" height=\"8\" fill=\"#ffffff\"/><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"#999999\" stroke-width=\"3\"/></pattern></defs>\n",
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14" font-weight="bold">{}</text>"#,
        width / 2,
        escape(title)
    );
    for (j, tone) in SkinTone::ALL.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + j * CELL_W + CELL_W / 2,
            TOP - 10,
            tone.label()
        );
    }
    for (i, row_tone) in SkinTone::ALL.iter().enumerate() {
        let y = TOP + i * CELL_H;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 8,
            y + CELL_H / 2 + 4,
            row_tone.label()
        );
        for j in 0..n {
            let x = LEFT + j * CELL_W;
            match matrix.values[i][j] {
                None => {
                    let _ = writeln!(
                        s,
                        "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{CELL_H}\" fill=\"url(#hatch)\" stroke=\"#ffffff\"/>"
                    );
                }
                Some(v) => {
                    let t = if scale > 0.0 { v / scale } else { 0.0 };
                    let fill = match palette {
                        Palette::Sequential => mix(MID, LOW, t.abs()),
                        Palette::Diverging if t < 0.0 => mix(MID, LOW, -t),
                        Palette::Diverging => mix(MID, HIGH, t),
                    };
                    let ink = if t.abs() > 0.6 { "#ffffff" } else { "#000000" };
                    let _ = writeln!(
                        s,
                        "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{CELL_H}\" fill=\"{fill}\" stroke=\"#ffffff\"/>"
                    );
                    let _ = writeln!(
                        s,
                        r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{}</text>"#,
                        x + CELL_W / 2,
                        y + CELL_H / 2 + 4,
                        cell_label(v)
                    );
                }
            }
        }
    }
    let legend = match palette {
        Palette::Sequential => format!("scale 0 to {}", cell_label(scale)),
        Palette::Diverging => format!("scale -{0} to {0}, centred at 0", cell_label(scale)),
    };
    let _ = writeln!(
        s,
        r##"<text x="{LEFT}" y="{}" fill="#555555">{legend}; hatched cells have no data</text>"##,
        TOP + n * CELL_H + 24
    );
    s.push_str("</svg>\n");
    s
}
