//! Vector- and sequence-level distances, and the per-tone tables built on them.

mod alignment;
mod pairs;
mod transport;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::TokenSequenceEmbedding;

pub use alignment::{alignment_table, AlignmentOptions, AlignmentRow, AlignmentTable, Pairing};
pub use pairs::{tone_pair_matrix, ToneMatrix, TonePairMatrix};
pub use transport::{solve_transport, TransportPlan};

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("zero-norm vector under cosine distance")]
    ZeroNorm,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("empty token sequence")]
    EmptySequence,
    #[error("transport solver did not converge within {0} pivots")]
    NoConvergence(usize),
    #[error("{0}")]
    Analysis(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundMetric {
    Euclidean,
    Cosine,
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<(), SimilarityError> {
    if a.len() != b.len() {
        Err(SimilarityError::DimensionMismatch(a.len(), b.len()))
    } else {
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity `a·b / (‖a‖‖b‖)`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    check_dims(a, b)?;
    let na = dot(a, a);
    let nb = dot(b, b);
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroNorm);
    }
    Ok((dot(a, b) / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// `1 − cos(a, b)`, in `[0, 2]`.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    Ok(1.0 - cosine_similarity(a, b)?)
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    check_dims(a, b)?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

pub fn ground_distance(metric: GroundMetric, a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    match metric {
        GroundMetric::Euclidean => euclidean_distance(a, b),
        GroundMetric::Cosine => cosine_distance(a, b),
    }
}

/// Ground-cost matrix between two vector lists, row-major `m × n`.
pub fn ground_matrix<A, B>(
    left: &[A],
    right: &[B],
    metric: GroundMetric,
) -> Result<Vec<Vec<f64>>, SimilarityError>
where
    A: AsRef<[f64]>,
    B: AsRef<[f64]>,
{
    if left.is_empty() || right.is_empty() {
        return Err(SimilarityError::EmptySequence);
    }
    left.iter()
        .map(|a| {
            right
                .iter()
                .map(|b| ground_distance(metric, a.as_ref(), b.as_ref()))
                .collect()
        })
        .collect()
}

/// Word Mover's Distance with uniform token weights, solved exactly.
pub fn wmd_vectors<A, B>(
    left: &[A],
    right: &[B],
    metric: GroundMetric,
) -> Result<(f64, TransportPlan), SimilarityError>
where
    A: AsRef<[f64]>,
    B: AsRef<[f64]>,
{
    let cost = ground_matrix(left, right, metric)?;
    let plan = solve_transport(&cost)?;
    Ok((plan.cost, plan))
}

pub fn wmd(
    a: &TokenSequenceEmbedding,
    b: &TokenSequenceEmbedding,
    metric: GroundMetric,
) -> Result<(f64, TransportPlan), SimilarityError> {
    wmd_vectors(a.vectors(), b.vectors(), metric)
}

/// Sum in a fixed order so that results do not depend on input ordering.
pub(crate) fn order_independent_mean(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_cases() {
        assert_eq!(cosine_distance(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(cosine_distance(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]), Err(SimilarityError::ZeroNorm));
        assert_eq!(
            cosine_distance(&[1.0], &[1.0, 0.0]),
            Err(SimilarityError::DimensionMismatch(1, 2))
        );
    }

    #[test]
    fn ground_cases() {
        assert_eq!(ground_distance(GroundMetric::Euclidean, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(ground_distance(GroundMetric::Cosine, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(ground_distance(GroundMetric::Euclidean, &[2.5, -1.0], &[2.5, -1.0]).unwrap(), 0.0);
    }

    #[test]
    fn wmd_forced_plan() {
        let a = [vec![0.0, 0.0], vec![2.0, 0.0]];
        let b = [vec![1.0, 0.0]];
        let (cost, plan) = wmd_vectors(&a, &b, GroundMetric::Euclidean).unwrap();
        assert_eq!(cost, 1.0);
        assert_eq!(plan.flows, vec![vec![0.5], vec![0.5]]);
    }

    #[test]
    fn wmd_identity() {
        let a = [vec![0.3, 1.0], vec![2.0, -1.0], vec![-0.5, 0.25]];
        for metric in [GroundMetric::Euclidean, GroundMetric::Cosine] {
            let (cost, plan) = wmd_vectors(&a, &a, metric).unwrap();
            assert!(cost.abs() < 1e-12);
            for i in 0..3 {
                assert!((plan.flows[i][i] - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wmd_errors() {
        let empty: [Vec<f64>; 0] = [];
        assert_eq!(
            wmd_vectors(&empty, &[vec![1.0]], GroundMetric::Euclidean).unwrap_err(),
            SimilarityError::EmptySequence
        );
        assert_eq!(
            wmd_vectors(&[vec![0.0, 0.0]], &[vec![1.0, 0.0]], GroundMetric::Cosine).unwrap_err(),
            SimilarityError::ZeroNorm
        );
    }

    fn vectors(max_len: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.1f64..3.0, d), 1..=max_len)
    }

    proptest! {
        #[test]
        fn wmd_properties(
            (a, b) in (1usize..5).prop_flat_map(|d| (vectors(6, d), vectors(6, d))),
            scale in 0.1f64..10.0,
        ) {
            for metric in [GroundMetric::Euclidean, GroundMetric::Cosine] {
                let (ab, plan) = wmd_vectors(&a, &b, metric).unwrap();
                let (ba, _) = wmd_vectors(&b, &a, metric).unwrap();
                prop_assert!((ab - ba).abs() < 1e-9);

                // Marginals and cost consistency.
                let (m, n) = (a.len(), b.len());
                for row in &plan.flows {
                    prop_assert!((row.iter().sum::<f64>() - 1.0 / m as f64).abs() < 1e-9);
                }
                for j in 0..n {
                    let col: f64 = plan.flows.iter().map(|r| r[j]).sum();
                    prop_assert!((col - 1.0 / n as f64).abs() < 1e-9);
                }
                let cost = ground_matrix(&a, &b, metric).unwrap();
                let recomputed: f64 = (0..m).flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| plan.flows[i][j] * cost[i][j]).sum();
                prop_assert!((recomputed - ab).abs() < 1e-9);

                // Product coupling is feasible, so it bounds the optimum.
                let product: f64 = cost.iter().flatten().sum::<f64>() / (m * n) as f64;
                prop_assert!(ab <= product + 1e-12);

                // Scaling.
                let sa: Vec<Vec<f64>> = a.iter().map(|v| v.iter().map(|x| x * scale).collect()).collect();
                let sb: Vec<Vec<f64>> = b.iter().map(|v| v.iter().map(|x| x * scale).collect()).collect();
                let (scaled, _) = wmd_vectors(&sa, &sb, metric).unwrap();
                match metric {
                    GroundMetric::Cosine => prop_assert!((scaled - ab).abs() < 1e-9),
                    GroundMetric::Euclidean => prop_assert!((scaled - scale * ab).abs() < 1e-9 * (1.0 + scale * ab)),
                }
            }
            let (single, _) = wmd_vectors(&a[..1], &b[..1], GroundMetric::Euclidean).unwrap();
            prop_assert_eq!(single, euclidean_distance(&a[0], &b[0]).unwrap());
        }

        #[test]
        fn cosine_scale_invariant(a in prop::collection::vec(-5.0f64..5.0, 3), b in prop::collection::vec(-5.0f64..5.0, 3), s in 0.01f64..100.0) {
            prop_assume!(norm(&a) > 1e-3 && norm(&b) > 1e-3);
            let d = cosine_distance(&a, &b).unwrap();
            prop_assert!((0.0..=2.0).contains(&d));
            let sa: Vec<f64> = a.iter().map(|x| x * s).collect();
            prop_assert!((cosine_distance(&sa, &b).unwrap() - d).abs() < 1e-9);
        }
    }
}
