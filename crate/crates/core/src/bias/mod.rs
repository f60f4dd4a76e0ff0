//! Tone bias metrics: RND against a neutral lexicon, WEAT with permutation
//! significance, and RNSB over a trained negative-sentiment direction.

mod lexicon;
mod rnd;
mod rnsb;
mod sets;
mod suite;
mod weat;

use thiserror::Error;

use crate::catalog::{EmojiFamily, SkinTone};
use crate::similarity::SimilarityError;
use crate::store::EmbeddingSet;

pub use lexicon::{filter_neutral, load_vad_path, parse_vad, NeutralLexicon, VadEntry};
pub use rnd::{rnd, rnd_matrix, RndMatrix, ToneGroup};
pub use rnsb::{
    kl_from_uniform, rnsb, rnsb_roles, train_sentiment_direction, OptimizerConfig, RnsbResult, RnsbRoleRow,
    RnsbSuite, Sentiment, SentimentDirection,
};
pub use sets::{bundled_caliskan, bundled_emoji_sentiment, AttributePair, SentimentSeeds, SetConfig};
pub use suite::{derive_seed, weat_roles, weat_tone_targets, PairSummary, WeatRow, WeatSuite};
pub use weat::{weat, PermutationConfig, WeatResult};

#[derive(Debug, Error, PartialEq)]
pub enum BiasError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("target sets differ in size: |X| = {x}, |Y| = {y}")]
    UnequalTargets { x: usize, y: usize },
    #[error("{0} is empty")]
    Empty(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid bounds [{low}, {high}]")]
    Bounds { low: f64, high: f64 },
    #[error("training error: {0}")]
    Training(String),
    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("set `{set}` has unresolvable members: {}", missing.join(", "))]
    MissingMembers { set: String, missing: Vec<String> },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Analysis(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<SimilarityError> for BiasError {
    fn from(e: SimilarityError) -> Self {
        match e {
            SimilarityError::ZeroNorm => BiasError::ZeroNorm,
            SimilarityError::DimensionMismatch(a, b) => BiasError::DimensionMismatch(a, b),
            other => BiasError::Analysis(other.to_string()),
        }
    }
}

/// Aggregated vector of one family variant, if embedded.
pub(crate) fn variant_vector<'a>(
    family: &EmojiFamily,
    tone: SkinTone,
    set: &'a EmbeddingSet,
) -> Option<&'a [f64]> {
    family
        .variant(tone)
        .and_then(|seq| set.get_emoji(&seq.codepoints))
        .map(|r| &r.aggregated[..])
}

/// Looks up every member in `set`; any miss is an error naming all of them.
pub fn resolve_members<'a>(
    set: &'a EmbeddingSet,
    label: &str,
    members: &[String],
) -> Result<Vec<&'a [f64]>, BiasError> {
    let mut found = Vec::with_capacity(members.len());
    let mut missing = Vec::new();
    for m in members {
        match set.resolve(m) {
            Some(r) => found.push(&r.aggregated[..]),
            None => missing.push(m.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(BiasError::MissingMembers {
            set: label.to_string(),
            missing,
        });
    }
    if found.is_empty() {
        return Err(BiasError::Empty(format!("set `{label}`")));
    }
    Ok(found)
}
