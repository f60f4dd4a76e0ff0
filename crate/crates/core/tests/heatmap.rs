use std::path::PathBuf;

use tonebias_core::report::{render_heatmap, Palette};
use tonebias_core::similarity::ToneMatrix;
use tonebias_core::SkinTone;

fn fixture_matrix() -> ToneMatrix {
    let mut m = ToneMatrix::empty();
    let scores = [0.0, -1.25, 0.5, 2.0, -0.375, 1.0];
    for (i, &a) in SkinTone::ALL.iter().enumerate() {
        m.set(a, a, Some(0.0));
        for (j, &b) in SkinTone::ALL.iter().enumerate().skip(i + 1) {
            if a == SkinTone::MediumDark && b == SkinTone::Dark {
                continue;
            }
            let v = scores[j] - scores[i];
            m.set(a, b, Some(v));
            m.set(b, a, Some(-v));
        }
    }
    m
}

#[test]
fn rnd_heatmap_matches_golden_file() {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/heatmap_rnd.svg");
    let svg = render_heatmap(&fixture_matrix(), Palette::Diverging, "fixture: RND (row minus column)");
    if std::env::var_os("TONEBIAS_BLESS").is_some() {
        std::fs::write(&golden, &svg).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).expect("golden heatmap present");
    assert_eq!(svg, expected);
}

#[test]
fn rendering_is_repeatable() {
    let m = fixture_matrix();
    assert_eq!(
        render_heatmap(&m, Palette::Sequential, "t"),
        render_heatmap(&m, Palette::Sequential, "t")
    );
}
