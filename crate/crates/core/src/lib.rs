//! Auditing toolkit for skin-toned emoji representations.
//!
//! The crate is organised bottom-up:
//!
//! * [`catalog`] parses the Unicode `emoji-test.txt` data file and groups
//!   toned sequences into base + variant families.
//! * [`store`] loads embedding sets (word2vec text and line-delimited dumps)
//!   and reports skin-tone coverage.
//! * [`tokens`] summarises tokenizer costs from token manifests.
//! * [`similarity`] provides cosine distance, exact Word Mover's Distance and
//!   the per-tone alignment and tone-pair tables built from them.
//! * [`bias`] implements RND, WEAT with permutation significance, and RNSB.
//! * [`report`] runs configured audits end to end and renders CSV, SVG and
//!   Markdown outputs.

pub mod bias;
pub mod catalog;
pub mod ids;
pub mod report;
pub mod similarity;
pub mod store;
pub mod tokens;

pub use catalog::{Catalog, EmojiFamily, EmojiSequence, SkinTone, ToneClassification};
pub use store::{Embedding, EmbeddingRecord, EmbeddingSet, RecordKind, TokenSequenceEmbedding};

/// Version string recorded in report provenance rows.
pub const TOOL_VERSION: &str = concat!("tonebias ", env!("CARGO_PKG_VERSION"));
