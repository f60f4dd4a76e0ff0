use serde::Serialize;

use super::{cosine_distance, order_independent_mean, SimilarityError};
use crate::catalog::{EmojiFamily, SkinTone};
use crate::store::EmbeddingSet;

const T: usize = SkinTone::ALL.len();

/// A tone-indexed 6×6 matrix; `None` marks a cell with no data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToneMatrix {
    pub values: [[Option<f64>; T]; T],
}

impl ToneMatrix {
    pub fn empty() -> Self {
        ToneMatrix { values: [[None; T]; T] }
    }

    pub fn get(&self, s: SkinTone, t: SkinTone) -> Option<f64> {
        self.values[s.index()][t.index()]
    }

    pub fn set(&mut self, s: SkinTone, t: SkinTone, value: Option<f64>) {
        self.values[s.index()][t.index()] = value;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TonePairMatrix {
    pub matrix: ToneMatrix,
    /// Families contributing to each cell.
    pub counts: [[usize; T]; T],
    /// Families with at least two embedded variants.
    pub sample_count: usize,
}

/// Mean cosine distance between variants of the same base emoji, per tone pair.
pub fn tone_pair_matrix(
    families: &[EmojiFamily],
    set: &EmbeddingSet,
) -> Result<TonePairMatrix, SimilarityError> {
    let embedded: Vec<[Option<&[f64]>; T]> = families
        .iter()
        .map(|f| {
            SkinTone::ALL.map(|tone| {
                f.variant(tone)
                    .and_then(|seq| set.get_emoji(&seq.codepoints))
                    .map(|r| &r.aggregated[..])
            })
        })
        .collect();
    let sample_count = embedded
        .iter()
        .filter(|row| row.iter().flatten().count() >= 2)
        .count();
    if sample_count == 0 {
        return Err(SimilarityError::Analysis(
            "no family has two embedded tone variants".into(),
        ));
    }

    let mut matrix = ToneMatrix::empty();
    let mut counts = [[0; T]; T];
    for s in 0..T {
        matrix.values[s][s] = Some(0.0);
        for t in s + 1..T {
            let mut values = embedded
                .iter()
                .filter_map(|row| Some((row[s]?, row[t]?)))
                .map(|(a, b)| cosine_distance(a, b))
                .collect::<Result<Vec<f64>, _>>()?;
            counts[s][t] = values.len();
            counts[t][s] = values.len();
            let mean = order_independent_mean(&mut values);
            matrix.values[s][t] = mean;
            matrix.values[t][s] = mean;
        }
    }
    Ok(TonePairMatrix {
        matrix,
        counts,
        sample_count,
    })
}
