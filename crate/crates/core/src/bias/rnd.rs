use serde::Serialize;

use super::{variant_vector, BiasError, NeutralLexicon};
use crate::catalog::{EmojiFamily, SkinTone};
use crate::similarity::{euclidean_distance, norm, ToneMatrix};
use crate::store::EmbeddingSet;

const T: usize = SkinTone::ALL.len();

#[derive(Debug, Clone, PartialEq)]
pub struct ToneGroup {
    pub tone: SkinTone,
    pub vectors: Vec<Vec<f64>>,
    pub centroid: Vec<f64>,
}

impl ToneGroup {
    /// Builds the group; with `normalize` each member is scaled to unit length
    /// before averaging.
    pub fn new(tone: SkinTone, vectors: Vec<Vec<f64>>, normalize: bool) -> Result<ToneGroup, BiasError> {
        let first = vectors
            .first()
            .ok_or_else(|| BiasError::Empty(format!("{tone} group")))?;
        let d = first.len();
        let mut centroid = vec![0.0; d];
        for v in &vectors {
            if v.len() != d {
                return Err(BiasError::DimensionMismatch(d, v.len()));
            }
            let scale = if normalize {
                let n = norm(v);
                if n == 0.0 {
                    return Err(BiasError::ZeroNorm);
                }
                1.0 / n
            } else {
                1.0
            };
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x * scale;
            }
        }
        let count = vectors.len() as f64;
        centroid.iter_mut().for_each(|c| *c /= count);
        Ok(ToneGroup {
            tone,
            vectors,
            centroid,
        })
    }
}

/// `Σ_m ‖V_m − V1‖ − ‖V_m − V2‖`. Positive means the neutral words sit closer to `g2`.
pub fn rnd<V: AsRef<[f64]>>(neutral: &[V], g1: &ToneGroup, g2: &ToneGroup) -> Result<f64, BiasError> {
    if neutral.is_empty() {
        return Err(BiasError::Empty("neutral word set".into()));
    }
    let mut total = 0.0;
    for v in neutral {
        let v = v.as_ref();
        total += euclidean_distance(v, &g1.centroid)? - euclidean_distance(v, &g2.centroid)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RndMatrix {
    pub matrix: ToneMatrix,
    /// Families used for each tone pair.
    pub counts: [[usize; T]; T],
    pub neutral_used: usize,
    pub neutral_missing: usize,
}

/// Pairwise RND between tone groups. Entry `(s, t)` uses every family that
/// has both variants embedded; `(t, s)` is its negation.
pub fn rnd_matrix(
    families: &[EmojiFamily],
    set: &EmbeddingSet,
    neutral: &NeutralLexicon,
    word_set: &EmbeddingSet,
    normalize: bool,
) -> Result<RndMatrix, BiasError> {
    let words: Vec<&[f64]> = neutral
        .words()
        .filter_map(|w| word_set.resolve(w))
        .map(|r| &r.aggregated[..])
        .collect();
    if words.is_empty() {
        return Err(BiasError::Analysis("no neutral word resolves in the word embeddings".into()));
    }
    if word_set.dimension() != set.dimension() {
        return Err(BiasError::DimensionMismatch(set.dimension(), word_set.dimension()));
    }

    let mut matrix = ToneMatrix::empty();
    let mut counts = [[0; T]; T];
    for (s, &ts) in SkinTone::ALL.iter().enumerate() {
        matrix.values[s][s] = Some(0.0);
        for (t, &tt) in SkinTone::ALL.iter().enumerate().skip(s + 1) {
            let (left, right): (Vec<Vec<f64>>, Vec<Vec<f64>>) = families
                .iter()
                .filter_map(|f| Some((variant_vector(f, ts, set)?.to_vec(), variant_vector(f, tt, set)?.to_vec())))
                .unzip();
            counts[s][t] = left.len();
            counts[t][s] = left.len();
            if left.is_empty() {
                continue;
            }
            let g1 = ToneGroup::new(ts, left, normalize)?;
            let g2 = ToneGroup::new(tt, right, normalize)?;
            let score = rnd(&words, &g1, &g2)?;
            matrix.values[s][t] = Some(score);
            matrix.values[t][s] = Some(-score);
        }
    }
    Ok(RndMatrix {
        matrix,
        counts,
        neutral_used: words.len(),
        neutral_missing: neutral.len() - words.len(),
    })
}
