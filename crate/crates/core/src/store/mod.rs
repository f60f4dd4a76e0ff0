//! Embedding sets.
//!
//! Vectors are held at `f64` precision whatever the source precision was.
//! Emoji records are keyed by codepoint-hex ids (see [`crate::ids`]); text
//! records by the word itself (word2vec) or by the id the dump assigns.

mod coverage;
mod dump;
mod word2vec;

use std::collections::{BTreeMap, HashMap};
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids;

pub use coverage::{coverage, CoverageReport};
pub use dump::{load_dump, load_dump_path, write_dump, DUMP_FORMAT_VERSION, FINAL_HIDDEN};
pub use word2vec::{load_word2vec_binary, load_word2vec_binary_path, load_word2vec_path, load_word2vec_text};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: non-numeric component `{token}`")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: non-finite component")]
    NonFinite { line: usize },
    #[error("line {line}: schema error: {reason}")]
    Schema { line: usize, reason: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("record `{id}` has dimension {found}, set dimension is {expected}")]
    RecordDimension {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("cannot merge sets of dimension {0} and {1}")]
    MergeDimension(usize, usize),
    #[error("conflicting vectors for id `{0}` while merging")]
    MergeConflict(String),
    #[error("vector contains non-finite values")]
    NotFinite,
    #[error("empty vector")]
    EmptyVector,
    #[error("i/o error: {0}")]
    Io(String),
}

/// Dense real vector with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Embedding, StoreError> {
        if values.is_empty() {
            return Err(StoreError::EmptyVector);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StoreError::NotFinite);
        }
        Ok(Embedding(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Embedding {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Embedding {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for Embedding {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        Embedding::new(values).map_err(serde::de::Error::custom)
    }
}

/// Per-token vectors of one sequence (the discrete representation).
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequenceEmbedding {
    vectors: Vec<Embedding>,
    token_ids: Option<Vec<i64>>,
}

impl TokenSequenceEmbedding {
    pub fn new(
        vectors: Vec<Embedding>,
        token_ids: Option<Vec<i64>>,
    ) -> Result<TokenSequenceEmbedding, String> {
        let Some(first) = vectors.first() else {
            return Err("token sequence must contain at least one vector".into());
        };
        let d = first.dim();
        if vectors.iter().any(|v| v.dim() != d) {
            return Err("token vectors differ in dimension".into());
        }
        if let Some(ids) = &token_ids {
            if ids.len() != vectors.len() {
                return Err(format!(
                    "{} token ids for {} token vectors",
                    ids.len(),
                    vectors.len()
                ));
            }
        }
        Ok(TokenSequenceEmbedding { vectors, token_ids })
    }

    pub fn single(vector: Embedding) -> TokenSequenceEmbedding {
        TokenSequenceEmbedding {
            vectors: vec![vector],
            token_ids: None,
        }
    }

    pub fn vectors(&self) -> &[Embedding] {
        &self.vectors
    }

    pub fn token_ids(&self) -> Option<&[i64]> {
        self.token_ids.as_deref()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    /// Drops tokens whose id is in `excluded`. Returns `None` when nothing
    /// would remain or the sequence carries no token ids.
    pub fn without_tokens(&self, excluded: &[i64]) -> Option<TokenSequenceEmbedding> {
        let ids = self.token_ids.as_ref()?;
        let (vectors, kept_ids): (Vec<Embedding>, Vec<i64>) = self
            .vectors
            .iter()
            .zip(ids)
            .filter(|(_, id)| !excluded.contains(id))
            .map(|(v, &id)| (v.clone(), id))
            .unzip();
        if vectors.is_empty() {
            return None;
        }
        Some(TokenSequenceEmbedding {
            vectors,
            token_ids: Some(kept_ids),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Emoji,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub id: String,
    pub kind: RecordKind,
    /// Source text for text records (e.g. a CLDR description).
    pub text: Option<String>,
    pub aggregated: Embedding,
    pub discrete: Option<TokenSequenceEmbedding>,
}

impl EmbeddingRecord {
    /// Static-model record: the discrete form is the aggregated vector alone.
    pub fn single(id: impl Into<String>, kind: RecordKind, vector: Embedding) -> EmbeddingRecord {
        EmbeddingRecord {
            id: id.into(),
            kind,
            text: None,
            discrete: Some(TokenSequenceEmbedding::single(vector.clone())),
            aggregated: vector,
        }
    }

    /// Discrete sequence, falling back to the aggregated vector.
    pub fn sequence(&self) -> TokenSequenceEmbedding {
        self.discrete
            .clone()
            .unwrap_or_else(|| TokenSequenceEmbedding::single(self.aggregated.clone()))
    }

    /// Text used to pair this record with an emoji description.
    pub fn text_key(&self) -> &str {
        self.text.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dimension: usize,
    records: BTreeMap<String, EmbeddingRecord>,
    source_label: String,
    /// Extra header fields carried through dump round trips.
    metadata: BTreeMap<String, serde_json::Value>,
    emoji_index: HashMap<String, String>,
    text_index: HashMap<String, String>,
}

impl EmbeddingSet {
    pub fn new(dimension: usize, source_label: impl Into<String>) -> EmbeddingSet {
        EmbeddingSet {
            dimension,
            records: BTreeMap::new(),
            source_label: source_label.into(),
            metadata: BTreeMap::new(),
            emoji_index: HashMap::new(),
            text_index: HashMap::new(),
        }
    }

    pub fn insert(&mut self, record: EmbeddingRecord) -> Result<(), StoreError> {
        let check = |found: usize| {
            if found == self.dimension {
                Ok(())
            } else {
                Err(StoreError::RecordDimension {
                    id: record.id.clone(),
                    expected: self.dimension,
                    found,
                })
            }
        };
        check(record.aggregated.dim())?;
        if let Some(seq) = &record.discrete {
            check(seq.dim())?;
        }
        if self.records.contains_key(&record.id) {
            return Err(StoreError::DuplicateId(record.id));
        }
        match record.kind {
            RecordKind::Emoji => {
                if let Ok(cps) = ids::id_to_codepoints(&record.id) {
                    self.emoji_index
                        .entry(ids::normalized_key(&cps))
                        .or_insert_with(|| record.id.clone());
                }
            }
            RecordKind::Text => {
                self.text_index
                    .entry(record.text_key().to_string())
                    .or_insert_with(|| record.id.clone());
            }
        }
        self.records.insert(record.id.clone(), record);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn metadata(&self) -> &BTreeMap<String, serde_json::Value> {
        &self.metadata
    }

    pub fn set_metadata(&mut self, metadata: BTreeMap<String, serde_json::Value>) {
        self.metadata = metadata;
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingRecord> {
        self.records.get(id)
    }

    /// Emoji lookup that ignores U+FE0F differences.
    pub fn get_emoji(&self, codepoints: &[u32]) -> Option<&EmbeddingRecord> {
        self.records
            .get(&ids::codepoints_to_id(codepoints))
            .filter(|r| r.kind == RecordKind::Emoji)
            .or_else(|| {
                self.emoji_index
                    .get(&ids::normalized_key(codepoints))
                    .and_then(|id| self.records.get(id))
            })
    }

    /// Resolves an attribute or target member: a codepoint-hex emoji id, or
    /// a word / text key.
    pub fn resolve(&self, key: &str) -> Option<&EmbeddingRecord> {
        if let Some(r) = self.records.get(key) {
            return Some(r);
        }
        if let Ok(cps) = ids::id_to_codepoints(key) {
            if let Some(r) = self.get_emoji(&cps) {
                return Some(r);
            }
        }
        self.get_text(key)
    }

    /// Text record whose text (or id, when no text is stored) equals `text`.
    pub fn get_text(&self, text: &str) -> Option<&EmbeddingRecord> {
        self.text_index.get(text).and_then(|id| self.records.get(id))
    }

    pub fn records(&self) -> impl Iterator<Item = &EmbeddingRecord> {
        self.records.values()
    }

    /// Union of two sets. Identical records under the same id are accepted;
    /// differing ones are an error.
    pub fn merge(&self, other: &EmbeddingSet) -> Result<EmbeddingSet, StoreError> {
        if self.dimension != other.dimension {
            return Err(StoreError::MergeDimension(self.dimension, other.dimension));
        }
        let label = match (self.source_label.is_empty(), other.source_label.is_empty()) {
            (_, true) => self.source_label.clone(),
            (true, false) => other.source_label.clone(),
            (false, false) => format!("{}+{}", self.source_label, other.source_label),
        };
        let mut out = self.clone();
        out.source_label = label;
        for (k, v) in &other.metadata {
            out.metadata.entry(k.clone()).or_insert_with(|| v.clone());
        }
        for record in other.records() {
            match out.records.get(&record.id) {
                Some(existing) if existing == record => {}
                Some(_) => return Err(StoreError::MergeConflict(record.id.clone())),
                None => out.insert(record.clone())?,
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(v: &[f64]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    fn set(label: &str, entries: &[(&str, RecordKind, &[f64])]) -> EmbeddingSet {
        let mut s = EmbeddingSet::new(entries.first().map_or(2, |e| e.2.len()), label);
        for (id, kind, v) in entries {
            s.insert(EmbeddingRecord::single(*id, *kind, emb(v))).unwrap();
        }
        s
    }

    #[test]
    fn embedding_rejects_non_finite() {
        assert!(Embedding::new(vec![1.0, f64::NAN]).is_err());
        assert!(Embedding::new(vec![f64::INFINITY]).is_err());
        assert!(Embedding::new(vec![]).is_err());
    }

    #[test]
    fn merge_identity_and_collisions() {
        let a = set(
            "e2v",
            &[("270A", RecordKind::Emoji, &[1.0, 0.0]), ("calm", RecordKind::Text, &[0.0, 1.0])],
        );
        let empty = EmbeddingSet::new(2, "");
        let merged = a.merge(&empty).unwrap();
        assert_eq!(merged, a);

        let b = set(
            "w2v",
            &[("calm", RecordKind::Text, &[0.0, 1.0]), ("joy", RecordKind::Text, &[1.0, 1.0])],
        );
        let m = a.merge(&b).unwrap();
        // 2 + 2 records minus one identical collision.
        assert_eq!(m.len(), 3);
        assert_eq!(m.source_label(), "e2v+w2v");

        let c = set("x", &[("calm", RecordKind::Text, &[0.5, 1.0])]);
        assert!(matches!(a.merge(&c), Err(StoreError::MergeConflict(id)) if id == "calm"));

        let d = set("y", &[("z", RecordKind::Text, &[0.5, 1.0, 2.0])]);
        assert!(matches!(a.merge(&d), Err(StoreError::MergeDimension(2, 3))));
    }

    #[test]
    fn emoji_lookup_ignores_variation_selector() {
        let s = set("x", &[("26A0", RecordKind::Emoji, &[1.0, 0.0])]);
        assert!(s.get_emoji(&[0x26A0, 0xFE0F]).is_some());
        assert!(s.resolve("26A0-FE0F").is_some());
        assert!(s.resolve("missing").is_none());
    }

    #[test]
    fn token_filtering() {
        let seq = TokenSequenceEmbedding::new(
            vec![emb(&[1.0]), emb(&[2.0]), emb(&[3.0])],
            Some(vec![10, 11, 12]),
        )
        .unwrap();
        let kept = seq.without_tokens(&[11]).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(kept.token_ids(), Some(&[10, 12][..]));
        assert!(seq.without_tokens(&[10, 11, 12]).is_none());
        assert!(TokenSequenceEmbedding::new(vec![], None).is_err());
        assert!(TokenSequenceEmbedding::new(vec![emb(&[1.0])], Some(vec![1, 2])).is_err());
    }

    #[test]
    fn insert_checks_dimension() {
        let mut s = EmbeddingSet::new(3, "x");
        let err = s
            .insert(EmbeddingRecord::single("a", RecordKind::Text, emb(&[1.0, 2.0])))
            .unwrap_err();
        assert!(matches!(err, StoreError::RecordDimension { expected: 3, found: 2, .. }));
    }
}
