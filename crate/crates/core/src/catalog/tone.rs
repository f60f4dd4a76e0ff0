use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The unmodified base plus the five Fitzpatrick-scale modifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkinTone {
    Default,
    Light,
    MediumLight,
    Medium,
    MediumDark,
    Dark,
}

/// First and last tone-modifier codepoints (U+1F3FB..=U+1F3FF).
pub const FIRST_MODIFIER: u32 = 0x1F3FB;
pub const LAST_MODIFIER: u32 = 0x1F3FF;

impl SkinTone {
    pub const ALL: [SkinTone; 6] = [
        SkinTone::Default,
        SkinTone::Light,
        SkinTone::MediumLight,
        SkinTone::Medium,
        SkinTone::MediumDark,
        SkinTone::Dark,
    ];

    /// The five non-default tones in ascending codepoint order.
    pub const MODIFIERS: [SkinTone; 5] = [
        SkinTone::Light,
        SkinTone::MediumLight,
        SkinTone::Medium,
        SkinTone::MediumDark,
        SkinTone::Dark,
    ];

    pub fn codepoint(self) -> Option<u32> {
        match self {
            SkinTone::Default => None,
            t => Some(FIRST_MODIFIER + t.index() as u32 - 1),
        }
    }

    pub fn from_codepoint(cp: u32) -> Option<SkinTone> {
        if is_modifier(cp) {
            Some(SkinTone::ALL[(cp - FIRST_MODIFIER) as usize + 1])
        } else {
            None
        }
    }

    /// Position in [`SkinTone::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            SkinTone::Default => "default",
            SkinTone::Light => "light",
            SkinTone::MediumLight => "medium-light",
            SkinTone::Medium => "medium",
            SkinTone::MediumDark => "medium-dark",
            SkinTone::Dark => "dark",
        }
    }

    /// Unordered tone pairs `(s, t)` with `s` before `t` in [`SkinTone::ALL`]
    /// order: default vs light, default vs medium-light, ..., medium-dark vs dark.
    pub fn pairs() -> Vec<(SkinTone, SkinTone)> {
        let mut out = Vec::with_capacity(15);
        for (i, &s) in Self::ALL.iter().enumerate() {
            for &t in &Self::ALL[i + 1..] {
                out.push((s, t));
            }
        }
        out
    }
}

pub fn is_modifier(cp: u32) -> bool {
    (FIRST_MODIFIER..=LAST_MODIFIER).contains(&cp)
}

impl fmt::Display for SkinTone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SkinTone {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SkinTone::ALL
            .iter()
            .copied()
            .find(|t| t.label() == s)
            .ok_or_else(|| format!("unknown skin tone `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modifiers_map_to_ascending_codepoints() {
        let cps: Vec<u32> = SkinTone::MODIFIERS
            .iter()
            .map(|t| t.codepoint().unwrap())
            .collect();
        assert_eq!(cps, vec![0x1F3FB, 0x1F3FC, 0x1F3FD, 0x1F3FE, 0x1F3FF]);
        assert_eq!(SkinTone::Default.codepoint(), None);
        for t in SkinTone::MODIFIERS {
            assert_eq!(SkinTone::from_codepoint(t.codepoint().unwrap()), Some(t));
        }
        assert_eq!(SkinTone::from_codepoint(0x1F3FA), None);
        assert_eq!(SkinTone::from_codepoint(0x1F400), None);
    }

    #[test]
    fn fifteen_pairs() {
        let pairs = SkinTone::pairs();
        assert_eq!(pairs.len(), 15);
        assert_eq!(pairs[0], (SkinTone::Default, SkinTone::Light));
        assert_eq!(pairs[14], (SkinTone::MediumDark, SkinTone::Dark));
    }

    #[test]
    fn labels_parse_back() {
        for t in SkinTone::ALL {
            assert_eq!(t.label().parse::<SkinTone>().unwrap(), t);
        }
    }
}
