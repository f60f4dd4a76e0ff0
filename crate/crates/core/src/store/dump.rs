//! Line-delimited JSON dump format produced by the extraction adapter.
//!
//! ```text
//! {"format_version":1,"dimension":4,"model_label":"m","representation":"final_hidden"}
//! {"id":"270A-1F3FF","kind":"emoji","aggregated":[...],"token_ids":[...],"tokens":[[...],...]}
//! {"id":"desc:270A-1F3FF","kind":"text","text":"raised fist: dark skin tone",...}
//! ```
//!
//! Extra header fields are preserved as set metadata. Canonical output writes
//! records in id order with shortest round-trip float formatting, so
//! load → write → load → write is byte-stable.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Embedding, EmbeddingRecord, EmbeddingSet, RecordKind, StoreError, TokenSequenceEmbedding};
use crate::ids;

pub const DUMP_FORMAT_VERSION: u32 = 1;
pub const FINAL_HIDDEN: &str = "final_hidden";

#[derive(Debug, Serialize, Deserialize)]
struct DumpHeader {
    format_version: u32,
    dimension: usize,
    model_label: String,
    representation: String,
    #[serde(flatten)]
    metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DumpRecord {
    id: String,
    kind: RecordKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default)]
    aggregated: Option<Vec<f64>>,
    #[serde(default)]
    token_ids: Vec<i64>,
    #[serde(default)]
    tokens: Vec<Vec<f64>>,
}

pub fn load_dump<R: BufRead>(reader: R) -> Result<EmbeddingSet, StoreError> {
    let mut lines = reader.lines().enumerate();
    let header: DumpHeader = loop {
        match lines.next() {
            None => {
                return Err(StoreError::Schema {
                    line: 1,
                    reason: "missing header".into(),
                })
            }
            Some((idx, line)) => {
                let line = line.map_err(|e| StoreError::Io(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line).map_err(|e| StoreError::Schema {
                    line: idx + 1,
                    reason: format!("header: {e}"),
                })?;
            }
        }
    };
    if header.format_version != DUMP_FORMAT_VERSION {
        return Err(StoreError::Schema {
            line: 1,
            reason: format!("unsupported format_version {}", header.format_version),
        });
    }
    if header.representation != FINAL_HIDDEN {
        return Err(StoreError::Schema {
            line: 1,
            reason: format!("unsupported representation `{}`", header.representation),
        });
    }
    if header.dimension == 0 {
        return Err(StoreError::Schema {
            line: 1,
            reason: "dimension must be positive".into(),
        });
    }

    let mut set = EmbeddingSet::new(header.dimension, header.model_label);
    set.set_metadata(header.metadata);
    let d = header.dimension;

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| StoreError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |reason: String| StoreError::Schema {
            line: line_no,
            reason,
        };
        let raw: DumpRecord = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        if raw.kind == RecordKind::Emoji && ids::id_to_codepoints(&raw.id).is_err() {
            return Err(schema(format!("emoji id `{}` is not a codepoint-hex id", raw.id)));
        }
        let aggregated = raw
            .aggregated
            .ok_or_else(|| schema(format!("record `{}` has no aggregated vector", raw.id)))?;
        let vector = |values: Vec<f64>, what: &str| -> Result<Embedding, StoreError> {
            if values.len() != d {
                return Err(schema(format!(
                    "record `{}`: {what} has dimension {}, header declares {d}",
                    raw.id,
                    values.len()
                )));
            }
            Embedding::new(values).map_err(|_| schema(format!("record `{}`: non-finite {what}", raw.id)))
        };
        let aggregated = vector(aggregated, "aggregated vector")?;
        if raw.tokens.is_empty() {
            return Err(schema(format!("record `{}` has no token vectors", raw.id)));
        }
        let tokens = raw
            .tokens
            .into_iter()
            .map(|t| vector(t, "token vector"))
            .collect::<Result<Vec<_>, _>>()?;
        let token_ids = (!raw.token_ids.is_empty()).then_some(raw.token_ids);
        let discrete = TokenSequenceEmbedding::new(tokens, token_ids)
            .map_err(|e| schema(format!("record `{}`: {e}", raw.id)))?;
        set.insert(EmbeddingRecord {
            id: raw.id,
            kind: raw.kind,
            text: raw.text,
            aggregated,
            discrete: Some(discrete),
        })
        .map_err(|e| schema(e.to_string()))?;
    }
    Ok(set)
}

pub fn load_dump_path(path: impl AsRef<Path>) -> Result<EmbeddingSet, StoreError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| StoreError::Io(format!("{}: {e}", path.display())))?;
    load_dump(std::io::BufReader::new(file))
}

/// Writes the canonical serialization of `set`.
pub fn write_dump<W: Write>(set: &EmbeddingSet, mut out: W) -> Result<(), StoreError> {
    let io = |e: std::io::Error| StoreError::Io(e.to_string());
    let header = DumpHeader {
        format_version: DUMP_FORMAT_VERSION,
        dimension: set.dimension(),
        model_label: set.source_label().to_string(),
        representation: FINAL_HIDDEN.to_string(),
        metadata: set.metadata().clone(),
    };
    writeln!(out, "{}", json(&header)).map_err(io)?;
    for r in set.records() {
        let seq = r.sequence();
        let record = DumpRecord {
            id: r.id.clone(),
            kind: r.kind,
            text: r.text.clone(),
            aggregated: Some(r.aggregated.to_vec()),
            token_ids: seq.token_ids().map(<[i64]>::to_vec).unwrap_or_default(),
            tokens: seq.vectors().iter().map(|v| v.to_vec()).collect(),
        };
        writeln!(out, "{}", json(&record)).map_err(io)?;
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("dump structures serialize")
}
