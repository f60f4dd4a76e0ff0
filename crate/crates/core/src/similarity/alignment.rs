use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{cosine_distance, order_independent_mean, wmd, GroundMetric, SimilarityError};
use crate::catalog::{EmojiFamily, SkinTone};
use crate::store::{EmbeddingSet, TokenSequenceEmbedding};

/// Emoji id → text key (a record id or the text of a text record).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pairing(pub BTreeMap<String, String>);

impl Pairing {
    /// Pairs every variant with its own CLDR short name.
    pub fn cldr_names(families: &[EmojiFamily]) -> Pairing {
        let mut map = BTreeMap::new();
        for family in families {
            for tone in SkinTone::ALL {
                if let Some(seq) = family.variant(tone) {
                    map.insert(seq.id(), seq.name.clone());
                }
            }
        }
        Pairing(map)
    }

    pub fn get(&self, emoji_id: &str) -> Option<&str> {
        self.0.get(emoji_id).map(String::as_str)
    }
}

#[derive(Debug, Clone, Default)]
pub struct AlignmentOptions {
    /// Token ids removed from emoji sequences before WMD (the bare modifier
    /// tokens). Empty keeps sequences whole.
    pub strip_token_ids: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentRow {
    pub tone: SkinTone,
    pub mean_cosine: Option<f64>,
    pub mean_wmd_cosine: Option<f64>,
    pub mean_wmd_euclidean: Option<f64>,
    pub pairs: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentTable {
    pub rows: Vec<AlignmentRow>,
}

impl AlignmentTable {
    pub fn row(&self, tone: SkinTone) -> &AlignmentRow {
        &self.rows[tone.index()]
    }
}

struct PairScores {
    cosine: f64,
    wmd_cosine: f64,
    wmd_euclidean: f64,
}

fn emoji_sequence(
    seq: TokenSequenceEmbedding,
    options: &AlignmentOptions,
) -> Option<TokenSequenceEmbedding> {
    if options.strip_token_ids.is_empty() || seq.token_ids().is_none() {
        Some(seq)
    } else {
        seq.without_tokens(&options.strip_token_ids)
    }
}

fn score_variant(
    family: &EmojiFamily,
    tone: SkinTone,
    set: &EmbeddingSet,
    pairing: &Pairing,
    options: &AlignmentOptions,
) -> Result<Option<PairScores>, SimilarityError> {
    let Some(seq) = family.variant(tone) else {
        return Ok(None);
    };
    let Some(emoji) = set.get_emoji(&seq.codepoints) else {
        return Ok(None);
    };
    let Some(text) = pairing.get(&seq.id()).and_then(|k| set.resolve(k)) else {
        return Ok(None);
    };
    let Some(emoji_seq) = emoji_sequence(emoji.sequence(), options) else {
        return Ok(None);
    };
    let text_seq = text.sequence();
    Ok(Some(PairScores {
        cosine: cosine_distance(&emoji.aggregated, &text.aggregated)?,
        wmd_cosine: wmd(&emoji_seq, &text_seq, GroundMetric::Cosine)?.0,
        wmd_euclidean: wmd(&emoji_seq, &text_seq, GroundMetric::Euclidean)?.0,
    }))
}

/// Per-tone mean distance between each emoji variant and its description.
pub fn alignment_table(
    families: &[EmojiFamily],
    set: &EmbeddingSet,
    pairing: &Pairing,
    options: &AlignmentOptions,
) -> Result<AlignmentTable, SimilarityError> {
    let per_family: Vec<Vec<Option<PairScores>>> = families
        .par_iter()
        .map(|family| {
            SkinTone::ALL
                .iter()
                .map(|&tone| score_variant(family, tone, set, pairing, options))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(SkinTone::ALL.len());
    let mut total = 0;
    for tone in SkinTone::ALL {
        let k = tone.index();
        let scores: Vec<&PairScores> = per_family.iter().filter_map(|f| f[k].as_ref()).collect();
        let column = |pick: fn(&PairScores) -> f64| {
            let mut values: Vec<f64> = scores.iter().map(|s| pick(s)).collect();
            order_independent_mean(&mut values)
        };
        rows.push(AlignmentRow {
            tone,
            mean_cosine: column(|s| s.cosine),
            mean_wmd_cosine: column(|s| s.wmd_cosine),
            mean_wmd_euclidean: column(|s| s.wmd_euclidean),
            pairs: scores.len(),
            skipped: families.len() - scores.len(),
        });
        total += scores.len();
    }
    if total == 0 {
        return Err(SimilarityError::Analysis(
            "no emoji variant has both an emoji and a description embedding".into(),
        ));
    }
    Ok(AlignmentTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::store::{Embedding, EmbeddingRecord, RecordKind};

    const FIST: &str = "\
# group: People & Body
# subgroup: hand-fingers-closed
270A ; fully-qualified # ✊ E0.6 raised fist
270A 1F3FB ; fully-qualified # ✊🏻 E1.0 raised fist: light skin tone
270A 1F3FF ; fully-qualified # ✊🏿 E1.0 raised fist: dark skin tone
";

    fn emb(v: &[f64]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    fn text(id: &str, text: &str, v: &[f64]) -> EmbeddingRecord {
        let mut r = EmbeddingRecord::single(id, RecordKind::Text, emb(v));
        r.text = Some(text.into());
        r
    }

    #[test]
    fn identical_vectors_give_zero() {
        let catalog = Catalog::parse_str(FIST).unwrap();
        let mut set = EmbeddingSet::new(2, "toy");
        for (i, seq) in catalog.sequences().iter().enumerate() {
            let v = [1.0 + i as f64, 0.5];
            set.insert(EmbeddingRecord::single(seq.id(), RecordKind::Emoji, emb(&v))).unwrap();
            set.insert(text(&format!("t{i}"), &seq.name, &v)).unwrap();
        }
        let pairing = Pairing::cldr_names(catalog.families());
        let table = alignment_table(catalog.families(), &set, &pairing, &Default::default()).unwrap();
        for tone in [SkinTone::Default, SkinTone::Light, SkinTone::Dark] {
            let row = table.row(tone);
            assert_eq!(row.pairs, 1);
            assert!(row.mean_cosine.unwrap().abs() < 1e-15);
            assert!(row.mean_wmd_euclidean.unwrap().abs() < 1e-15);
        }
        assert_eq!(table.row(SkinTone::Medium).pairs, 0);
        assert_eq!(table.row(SkinTone::Medium).skipped, 1);
        assert_eq!(table.row(SkinTone::Medium).mean_cosine, None);
    }

    #[test]
    fn one_pair_by_hand() {
        let catalog = Catalog::parse_str(FIST).unwrap();
        let mut set = EmbeddingSet::new(2, "toy");
        set.insert(EmbeddingRecord::single("270A-1F3FF", RecordKind::Emoji, emb(&[1.0, 0.0]))).unwrap();
        let mut t = text("d", "raised fist: dark skin tone", &[1.0, 1.0]);
        t.discrete = Some(TokenSequenceEmbedding::new(vec![emb(&[0.0, 1.0]), emb(&[1.0, 1.0])], None).unwrap());
        set.insert(t).unwrap();
        let pairing = Pairing::cldr_names(catalog.families());
        let table = alignment_table(catalog.families(), &set, &pairing, &Default::default()).unwrap();
        let row = table.row(SkinTone::Dark);
        assert!((row.mean_cosine.unwrap() - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        // [1,0] sends half its mass to each token.
        assert!((row.mean_wmd_euclidean.unwrap() - (0.5 * 2f64.sqrt() + 0.5)).abs() < 1e-12);
        assert!((row.mean_wmd_cosine.unwrap() - 0.5 * (1.0 + 1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert_eq!(table.row(SkinTone::Default).skipped, 1);
    }

    #[test]
    fn stripping_modifier_tokens() {
        let catalog = Catalog::parse_str(FIST).unwrap();
        let mut set = EmbeddingSet::new(1, "toy");
        let mut e = EmbeddingRecord::single("270A-1F3FB", RecordKind::Emoji, emb(&[1.0]));
        e.discrete = Some(TokenSequenceEmbedding::new(vec![emb(&[1.0]), emb(&[5.0])], Some(vec![10, 99])).unwrap());
        set.insert(e).unwrap();
        set.insert(text("d", "raised fist: light skin tone", &[1.0])).unwrap();
        let pairing = Pairing::cldr_names(catalog.families());
        let whole = alignment_table(catalog.families(), &set, &pairing, &Default::default()).unwrap();
        assert_eq!(whole.row(SkinTone::Light).mean_wmd_euclidean, Some(2.0));
        let opts = AlignmentOptions { strip_token_ids: vec![99] };
        let stripped = alignment_table(catalog.families(), &set, &pairing, &opts).unwrap();
        assert_eq!(stripped.row(SkinTone::Light).mean_wmd_euclidean, Some(0.0));
    }

    #[test]
    fn empty_intersection_is_an_error() {
        let catalog = Catalog::parse_str(FIST).unwrap();
        let set = EmbeddingSet::new(2, "toy");
        let pairing = Pairing::cldr_names(catalog.families());
        assert!(matches!(
            alignment_table(catalog.families(), &set, &pairing, &Default::default()),
            Err(SimilarityError::Analysis(_))
        ));
    }
}
