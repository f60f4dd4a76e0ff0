//! Codepoint-hex identifiers.
//!
//! Emoji records are keyed by their codepoints as uppercase hex joined with
//! `-` (for example `270A-1F3FF`), never by the raw emoji characters.

use std::fmt;

/// U+FE0F VARIATION SELECTOR-16.
pub const VARIATION_SELECTOR_16: u32 = 0xFE0F;
/// U+200D ZERO WIDTH JOINER.
pub const ZERO_WIDTH_JOINER: u32 = 0x200D;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidId(pub String);

impl fmt::Display for InvalidId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid codepoint id `{}`", self.0)
    }
}

impl std::error::Error for InvalidId {}

pub fn codepoints_to_id(codepoints: &[u32]) -> String {
    codepoints
        .iter()
        .map(|cp| format!("{cp:X}"))
        .collect::<Vec<_>>()
        .join("-")
}

/// Parses `270A-1F3FF` style ids. Hex digits may be lower or upper case.
pub fn id_to_codepoints(id: &str) -> Result<Vec<u32>, InvalidId> {
    if id.is_empty() {
        return Err(InvalidId(id.to_string()));
    }
    id.split('-')
        .map(|part| {
            if part.is_empty() || part.len() > 6 {
                return Err(InvalidId(id.to_string()));
            }
            let cp = u32::from_str_radix(part, 16).map_err(|_| InvalidId(id.to_string()))?;
            char::from_u32(cp).ok_or_else(|| InvalidId(id.to_string()))?;
            Ok(cp)
        })
        .collect()
}

pub fn strip_variation_selectors(codepoints: &[u32]) -> Vec<u32> {
    codepoints
        .iter()
        .copied()
        .filter(|&cp| cp != VARIATION_SELECTOR_16)
        .collect()
}

/// Key used to match sequences regardless of U+FE0F presence.
pub fn normalized_key(codepoints: &[u32]) -> String {
    codepoints_to_id(&strip_variation_selectors(codepoints))
}

pub fn codepoints_to_string(codepoints: &[u32]) -> String {
    codepoints.iter().filter_map(|&cp| char::from_u32(cp)).collect()
}

/// Whether a scalar value falls in the ranges used by emoji characters and
/// their sequence glue (ZWJ, VS16, keycap, tags, regional indicators).
pub fn is_emoji_scalar(c: char) -> bool {
    matches!(
        c as u32,
        0x00A9
            | 0x00AE
            | 0x203C
            | 0x2049
            | 0x200D
            | 0x20E3
            | 0x2122
            | 0x2139
            | 0x2194..=0x21AA
            | 0x231A..=0x23FF
            | 0x24C2
            | 0x25AA..=0x27BF
            | 0x2934..=0x2935
            | 0x2B05..=0x2B55
            | 0x3030
            | 0x303D
            | 0x3297
            | 0x3299
            | 0xFE0F
            | 0x1F000..=0x1FAFF
            | 0xE0020..=0xE007F
    )
}

/// A token counts as an emoji when every character is an emoji scalar.
/// Keycap sequences (`#`, `*`, digits followed by U+20E3) are accepted too.
pub fn is_emoji_token(token: &str) -> bool {
    if token.is_empty() {
        return false;
    }
    let keycap = token.contains('\u{20E3}');
    token
        .chars()
        .all(|c| is_emoji_scalar(c) || (keycap && matches!(c, '#' | '*' | '0'..='9')))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_roundtrip() {
        let cps = vec![0x1F469, 0x1F3FD, 0x200D, 0x1F373];
        let id = codepoints_to_id(&cps);
        assert_eq!(id, "1F469-1F3FD-200D-1F373");
        assert_eq!(id_to_codepoints(&id).unwrap(), cps);
        assert_eq!(id_to_codepoints("270a").unwrap(), vec![0x270A]);
    }

    #[test]
    fn rejects_bad_ids() {
        assert!(id_to_codepoints("").is_err());
        assert!(id_to_codepoints("hello").is_err());
        assert!(id_to_codepoints("270A--1F3FF").is_err());
        assert!(id_to_codepoints("D800").is_err());
    }

    #[test]
    fn emoji_tokens() {
        assert!(is_emoji_token("✊🏿"));
        assert!(is_emoji_token("👩🏽‍🍳"));
        assert!(is_emoji_token("#️⃣"));
        assert!(!is_emoji_token("#"));
        assert!(!is_emoji_token("calm"));
        assert!(!is_emoji_token("✊x"));
    }
}
