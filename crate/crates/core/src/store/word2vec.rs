use std::io::BufRead;
use std::path::Path;

use super::{Embedding, EmbeddingRecord, EmbeddingSet, RecordKind, StoreError};
use crate::ids;

/// Loads the word2vec text format: an optional `count dim` header, then one
/// `token v1 ... vd` line per vector. Tokens made entirely of emoji scalars
/// become [`RecordKind::Emoji`] records keyed by codepoint-hex id.
pub fn load_word2vec_text<R: BufRead>(
    reader: R,
    source_label: &str,
) -> Result<EmbeddingSet, StoreError> {
    let mut set: Option<EmbeddingSet> = None;
    let mut header_dim: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| StoreError::Io(e.to_string()))?;
        let mut fields = line.split_ascii_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();

        if line_no == 1 && rest.len() == 1 {
            if let (Ok(_count), Ok(dim)) = (token.parse::<usize>(), rest[0].parse::<usize>()) {
                header_dim = Some(dim);
                continue;
            }
        }

        let expected = header_dim
            .or_else(|| set.as_ref().map(EmbeddingSet::dimension))
            .unwrap_or(rest.len());
        if rest.len() != expected || expected == 0 {
            return Err(StoreError::DimensionMismatch {
                line: line_no,
                expected,
                found: rest.len(),
            });
        }
        let mut values = Vec::with_capacity(rest.len());
        for t in &rest {
            let v: f64 = t.parse().map_err(|_| StoreError::NonNumeric {
                line: line_no,
                token: (*t).to_string(),
            })?;
            if !v.is_finite() {
                return Err(StoreError::NonFinite { line: line_no });
            }
            values.push(v);
        }

        let set = set.get_or_insert_with(|| EmbeddingSet::new(expected, source_label));
        insert_token(set, token, values, line_no)?;
    }

    Ok(set.unwrap_or_else(|| EmbeddingSet::new(header_dim.unwrap_or(0), source_label)))
}

fn insert_token(set: &mut EmbeddingSet, token: &str, values: Vec<f64>, line: usize) -> Result<(), StoreError> {
    let (id, kind) = if ids::is_emoji_token(token) {
        let cps: Vec<u32> = token.chars().map(|c| c as u32).collect();
        (ids::codepoints_to_id(&cps), RecordKind::Emoji)
    } else {
        (token.to_string(), RecordKind::Text)
    };
    let vector = Embedding::new(values).map_err(|_| StoreError::NonFinite { line })?;
    set.insert(EmbeddingRecord::single(id, kind, vector))
        .map_err(|e| match e {
            StoreError::DuplicateId(id) => StoreError::Schema {
                line,
                reason: format!("duplicate token `{id}`"),
            },
            other => other,
        })
}

/// Loads the word2vec binary format: a `count dim` text line, then per entry
/// the token, one space and `dim` little-endian `f32` values. Errors report
/// the entry number counting the header as 1.
pub fn load_word2vec_binary<R: BufRead>(mut reader: R, source_label: &str) -> Result<EmbeddingSet, StoreError> {
    let io = |e: std::io::Error| StoreError::Io(e.to_string());
    let mut header = String::new();
    reader.read_line(&mut header).map_err(io)?;
    let bad_header = || StoreError::Schema {
        line: 1,
        reason: format!("expected `count dim` header, found `{}`", header.trim()),
    };
    let mut parts = header.split_ascii_whitespace();
    let count: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad_header)?;
    let dim: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad_header)?;
    if dim == 0 || parts.next().is_some() {
        return Err(bad_header());
    }

    let mut set = EmbeddingSet::new(dim, source_label);
    let mut raw = vec![0u8; dim * 4];
    for entry in 0..count {
        let line = entry + 2;
        let truncated = |what: &str| StoreError::Schema {
            line,
            reason: format!("truncated {what}"),
        };
        let mut token = Vec::new();
        reader.read_until(b' ', &mut token).map_err(io)?;
        if token.pop() != Some(b' ') {
            return Err(truncated("token"));
        }
        let start = token.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(token.len());
        let token = std::str::from_utf8(&token[start..]).map_err(|_| StoreError::Schema {
            line,
            reason: "token is not UTF-8".into(),
        })?;
        if token.is_empty() {
            return Err(truncated("token"));
        }
        reader.read_exact(&mut raw).map_err(|_| truncated("vector"))?;
        let values: Vec<f64> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        insert_token(&mut set, token, values, line)?;
    }
    Ok(set)
}

pub fn load_word2vec_path(path: impl AsRef<Path>, source_label: &str) -> Result<EmbeddingSet, StoreError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| StoreError::Io(format!("{}: {e}", path.display())))?;
    load_word2vec_text(std::io::BufReader::new(file), source_label)
}

pub fn load_word2vec_binary_path(path: impl AsRef<Path>, source_label: &str) -> Result<EmbeddingSet, StoreError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| StoreError::Io(format!("{}: {e}", path.display())))?;
    load_word2vec_binary(std::io::BufReader::new(file), source_label)
}
