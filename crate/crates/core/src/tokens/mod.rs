//! Tokenizer cost audits over token manifests.
//!
//! A manifest records, for one tokenizer, the token ids each emoji (or bare
//! modifier) encodes to. Manifests share the line-delimited JSON style of
//! embedding dumps:
//!
//! ```text
//! {"model_label":"gemma-2","tokenizer_label":"google/gemma-2-2b-it"}
//! {"id":"1F3FB","token_ids":[241],"count":1}
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::SkinTone;
use crate::ids;

mod stats;

pub use stats::{asymmetry_flags, summarize, AsymmetryFinding, TokenStats};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("id `{0}` not present in manifest")]
    MissingId(String),
    #[error("manifest has no entry for the {0} modifier")]
    MissingModifier(SkinTone),
    #[error("no ids to summarize")]
    Empty,
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub model_label: String,
    #[serde(default)]
    pub tokenizer_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub token_ids: Vec<i64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenManifest {
    pub header: ManifestHeader,
    pub entries: BTreeMap<String, ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct EntryLine {
    id: String,
    token_ids: Vec<i64>,
    count: usize,
}

impl TokenManifest {
    pub fn new(model_label: impl Into<String>, tokenizer_label: impl Into<String>) -> Self {
        TokenManifest {
            header: ManifestHeader {
                model_label: model_label.into(),
                tokenizer_label: tokenizer_label.into(),
            },
            entries: BTreeMap::new(),
        }
    }

    pub fn model_label(&self) -> &str {
        &self.header.model_label
    }

    /// Adds an entry; `count` is the number of token ids.
    pub fn insert(&mut self, id: impl Into<String>, token_ids: Vec<i64>) {
        let count = token_ids.len();
        self.entries.insert(id.into(), ManifestEntry { token_ids, count });
    }

    pub fn count(&self, id: &str) -> Option<usize> {
        self.entries.get(id).map(|e| e.count)
    }

    pub fn load<R: BufRead>(reader: R) -> Result<TokenManifest, AuditError> {
        let mut header: Option<ManifestHeader> = None;
        let mut entries = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| AuditError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let format = |reason: String| AuditError::Format {
                line: line_no,
                reason,
            };
            if header.is_none() {
                header = Some(serde_json::from_str(&line).map_err(|e| format(format!("header: {e}")))?);
                continue;
            }
            let entry: EntryLine = serde_json::from_str(&line).map_err(|e| format(e.to_string()))?;
            if entry.count != entry.token_ids.len() || entry.count == 0 {
                return Err(format(format!(
                    "entry `{}`: count {} does not match {} token ids",
                    entry.id,
                    entry.count,
                    entry.token_ids.len()
                )));
            }
            if entries
                .insert(
                    entry.id.clone(),
                    ManifestEntry {
                        token_ids: entry.token_ids,
                        count: entry.count,
                    },
                )
                .is_some()
            {
                return Err(format(format!("duplicate id `{}`", entry.id)));
            }
        }
        let header = header.ok_or(AuditError::Format {
            line: 1,
            reason: "missing header".into(),
        })?;
        Ok(TokenManifest { header, entries })
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<TokenManifest, AuditError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| AuditError::Io(format!("{}: {e}", path.display())))?;
        TokenManifest::load(std::io::BufReader::new(file))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<(), AuditError> {
        let io = |e: std::io::Error| AuditError::Io(e.to_string());
        let line = serde_json::to_string(&self.header).expect("header serializes");
        writeln!(out, "{line}").map_err(io)?;
        for (id, e) in &self.entries {
            let line = serde_json::to_string(&EntryLine {
                id: id.clone(),
                token_ids: e.token_ids.clone(),
                count: e.count,
            })
            .expect("entry serializes");
            writeln!(out, "{line}").map_err(io)?;
        }
        Ok(())
    }
}

/// Token counts of the five bare modifier codepoints. Default is excluded.
pub fn modifier_lengths(manifest: &TokenManifest) -> Result<BTreeMap<SkinTone, usize>, AuditError> {
    SkinTone::MODIFIERS
        .iter()
        .map(|&tone| {
            let cp = tone.codepoint().expect("modifier tones have codepoints");
            manifest
                .count(&ids::codepoints_to_id(&[cp]))
                .map(|c| (tone, c))
                .ok_or(AuditError::MissingModifier(tone))
        })
        .collect()
}
