//! Audit orchestration.
//!
//! [`run`] executes the analyses named in an [`AuditConfig`] against the
//! configured catalog, embedding sources and manifests, and returns every
//! output file as bytes. Nothing touches the filesystem until
//! [`AuditReport::write_to`]. Failures of individual analyses are collected
//! rather than aborting the run.

mod config;
mod sections;
mod svg;
mod table;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::store::{self, EmbeddingSet};

pub use config::{
    AlignOptions, Analysis, AuditConfig, EmbeddingSource, PairwiseOptions, RndOptions, RnsbOptions, SourceFormat,
    WeatOptions,
};
pub use svg::{cell_label, render_heatmap, Palette};
pub use table::{num, opt, short, Table};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("input error: {0}")]
    Input(String),
}

/// One analysis that did not complete for one input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisFailure {
    pub analysis: String,
    /// Embedding source label or manifest file name.
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    /// Output file name to contents.
    pub files: BTreeMap<String, Vec<u8>>,
    pub failures: Vec<AnalysisFailure>,
}

impl AuditReport {
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(), ReportError> {
        let dir = dir.as_ref();
        let io = |e: std::io::Error| ReportError::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes).map_err(io)?;
        }
        Ok(())
    }

    /// 0 when every analysis succeeded, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

/// Hex SHA-256 of a file's contents.
pub fn file_digest(path: &Path) -> Result<String, ReportError> {
    let bytes = std::fs::read(path).map_err(|e| ReportError::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Lower-case filename fragment: ASCII alphanumerics, `-`, `_` and `.` kept,
/// everything else replaced by `_`.
pub fn sanitize_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

fn provenance(config: &AuditConfig) -> Result<String, ReportError> {
    let mut inputs = vec![config.data_file.as_path()];
    inputs.extend(config.embedding_sources.iter().map(|s| s.path.as_path()));
    inputs.extend(config.manifests.iter().map(|p| p.as_path()));
    inputs.extend(
        [
            &config.align.strip_manifest,
            &config.rnd.lexicon,
            &config.weat.role_sets,
            &config.weat.benchmark_sets,
            &config.rnsb.seeds,
        ]
        .into_iter()
        .flatten()
        .map(|p| p.as_path()),
    );
    let digests = inputs
        .iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(format!("{name}:{}", file_digest(p)?))
        })
        .collect::<Result<Vec<_>, ReportError>>()?;
    Ok(format!(
        "tool={}; inputs={}; seed={}",
        crate::TOOL_VERSION,
        digests.join(","),
        config.seed
    ))
}

fn load_source(source: &EmbeddingSource) -> Result<EmbeddingSet, String> {
    let result = match source.format {
        SourceFormat::Word2vec => store::load_word2vec_path(&source.path, &source.label),
        SourceFormat::Word2vecBinary => store::load_word2vec_binary_path(&source.path, &source.label),
        SourceFormat::Dump => store::load_dump_path(&source.path),
    };
    result.map_err(|e| format!("{}: {e}", source.path.display()))
}

/// Runs every requested analysis once, in configuration order.
pub fn run(config: &AuditConfig) -> Result<AuditReport, ReportError> {
    config.validate()?;
    let catalog = Catalog::from_path(&config.data_file).map_err(|e| ReportError::Input(e.to_string()))?;
    if let Some(expected) = &config.unicode_version {
        catalog
            .check_version(expected)
            .map_err(|e| ReportError::Input(e.to_string()))?;
    }
    let provenance = provenance(config)?;

    let mut failures = Vec::new();
    let mut sources = Vec::new();
    for source in &config.embedding_sources {
        match load_source(source) {
            Ok(set) => sources.push((source.label.clone(), source.audit, set)),
            Err(message) => failures.push(AnalysisFailure {
                analysis: "load".into(),
                source: source.label.clone(),
                message,
            }),
        }
    }

    let mut ctx = sections::Context {
        config,
        catalog: &catalog,
        loaded: &sources,
        provenance: &provenance,
        files: BTreeMap::new(),
        markdown: Vec::new(),
        failures,
        significance: None,
    };
    let mut seen = Vec::new();
    for &analysis in &config.analyses {
        if seen.contains(&analysis) {
            continue;
        }
        seen.push(analysis);
        ctx.run(analysis);
    }
    Ok(ctx.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_become_filenames() {
        assert_eq!(sanitize_label("Gemma 7B/it"), "gemma_7b_it");
        assert_eq!(sanitize_label("emoji2vec-300.d"), "emoji2vec-300.d");
    }

    #[test]
    fn exit_codes() {
        let mut r = AuditReport::default();
        assert_eq!(r.exit_code(), 0);
        r.failures.push(AnalysisFailure {
            analysis: "rnd".into(),
            source: "x".into(),
            message: "m".into(),
        });
        assert_eq!(r.exit_code(), 2);
    }
}
