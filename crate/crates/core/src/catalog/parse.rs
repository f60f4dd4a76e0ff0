//! Line grammar of `emoji-test.txt`:
//!
//! ```text
//! # group: Smileys & Emotion
//! # subgroup: face-smiling
//! 270A ; fully-qualified # ✊ E0.6 raised fist
//! ```

use std::io::BufRead;

use super::{CatalogError, EmojiSequence, Qualification};

pub(super) struct ParsedFile {
    pub sequences: Vec<EmojiSequence>,
    pub unicode_version: String,
}

pub(super) fn parse_lines<R: BufRead>(reader: R) -> Result<ParsedFile, CatalogError> {
    let mut group = String::new();
    let mut subgroup = String::new();
    let mut unicode_version = String::new();
    let mut sequences = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CatalogError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(g) = comment.strip_prefix("group:") {
                group = g.trim().to_string();
                subgroup.clear();
            } else if let Some(sg) = comment.strip_prefix("subgroup:") {
                subgroup = sg.trim().to_string();
            } else if let Some(v) = comment.strip_prefix("Version:") {
                if unicode_version.is_empty() {
                    unicode_version = v.trim().to_string();
                }
            }
            continue;
        }
        sequences.push(parse_data_line(trimmed, line_no, &group, &subgroup)?);
    }

    Ok(ParsedFile {
        sequences,
        unicode_version,
    })
}

fn parse_data_line(
    line: &str,
    line_no: usize,
    group: &str,
    subgroup: &str,
) -> Result<EmojiSequence, CatalogError> {
    let malformed = |reason: &str| CatalogError::Parse {
        line: line_no,
        reason: reason.to_string(),
    };

    let (cp_field, rest) = line
        .split_once(';')
        .ok_or_else(|| malformed("missing `;` separator"))?;
    let (status_field, comment) = match rest.split_once('#') {
        Some((s, c)) => (s, Some(c)),
        None => (rest, None),
    };

    let mut codepoints = Vec::new();
    for token in cp_field.split_whitespace() {
        let cp = u32::from_str_radix(token, 16)
            .ok()
            .filter(|&cp| token.len() <= 6 && char::from_u32(cp).is_some())
            .ok_or_else(|| malformed(&format!("invalid codepoint `{token}`")))?;
        codepoints.push(cp);
    }
    if codepoints.is_empty() {
        return Err(malformed("empty codepoint field"));
    }

    let status = status_field.trim();
    let qualification = Qualification::from_status(status).ok_or_else(|| {
        CatalogError::UnknownStatus {
            line: line_no,
            status: status.to_string(),
        }
    })?;

    let (emoji_version, name) = comment.map(split_comment).unwrap_or_default();
    if name.is_empty() && qualification != Qualification::Component {
        return Err(malformed("missing emoji name"));
    }

    Ok(EmojiSequence {
        codepoints,
        qualification,
        name,
        group: group.to_string(),
        subgroup: subgroup.to_string(),
        emoji_version,
    })
}

/// Splits `✊ E0.6 raised fist` into (`Some("E0.6")`, `"raised fist"`).
fn split_comment(comment: &str) -> (Option<String>, String) {
    let comment = comment.trim();
    // Skip the rendered emoji glyph.
    let after_glyph = match comment.split_once(char::is_whitespace) {
        Some((_, rest)) => rest.trim_start(),
        None => return (None, String::new()),
    };
    if let Some((first, rest)) = after_glyph.split_once(char::is_whitespace) {
        if is_version_token(first) {
            return (Some(first.to_string()), rest.trim().to_string());
        }
    } else if is_version_token(after_glyph) {
        return (Some(after_glyph.to_string()), String::new());
    }
    (None, after_glyph.trim().to_string())
}

fn is_version_token(token: &str) -> bool {
    token
        .strip_prefix('E')
        .and_then(|v| v.split_once('.'))
        .is_some_and(|(major, minor)| {
            !major.is_empty()
                && !minor.is_empty()
                && major.bytes().all(|b| b.is_ascii_digit())
                && minor.bytes().all(|b| b.is_ascii_digit())
        })
}
