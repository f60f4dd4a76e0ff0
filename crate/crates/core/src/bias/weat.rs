//! Association test statistic, effect size and partition permutation test.
//!
//! The p-value counts equal-size partitions of `X ∪ Y` whose statistic is at
//! least the observed one, identity partition included, so it is never 0.
//! Small instances are enumerated; larger ones are sampled with a seeded
//! ChaCha8 generator and reported as `(1 + hits) / (1 + draws)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::BiasError;
use crate::similarity::cosine_similarity;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationConfig {
    /// Enumerate every partition when their number is at most this.
    pub exact_limit: u64,
    /// Monte Carlo draws beyond the exact limit.
    pub samples: usize,
    pub seed: u64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            exact_limit: 20_000,
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeatResult {
    pub statistic: f64,
    pub effect_size: f64,
    pub p_value: f64,
    /// Partitions evaluated, identity included.
    pub permutations: u64,
    pub exact: bool,
}

fn association<V: AsRef<[f64]>>(w: &[f64], a: &[V], b: &[V]) -> Result<f64, BiasError> {
    let mean = |set: &[V]| -> Result<f64, BiasError> {
        let mut sum = 0.0;
        for v in set {
            sum += cosine_similarity(w, v.as_ref())?;
        }
        Ok(sum / set.len() as f64)
    };
    Ok(mean(a)? - mean(b)?)
}

/// `Σ_{in} s − Σ_{out} s`, each sum taken in index order.
fn partition_statistic(s: &[f64], in_x: &[bool]) -> f64 {
    let mut x = 0.0;
    let mut y = 0.0;
    for (v, &inside) in s.iter().zip(in_x) {
        if inside {
            x += v;
        } else {
            y += v;
        }
    }
    x - y
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut r: u64 = 1;
    for i in 0..k {
        r = match r.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u64::MAX,
        };
    }
    r
}

/// Population standard deviation, summed in sorted order.
fn population_std(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
    dev.sort_by(f64::total_cmp);
    (dev.iter().sum::<f64>() / n).sqrt()
}

pub fn weat<V: AsRef<[f64]>>(
    x: &[V],
    y: &[V],
    a: &[V],
    b: &[V],
    cfg: &PermutationConfig,
) -> Result<WeatResult, BiasError> {
    if x.len() != y.len() {
        return Err(BiasError::UnequalTargets { x: x.len(), y: y.len() });
    }
    if x.is_empty() {
        return Err(BiasError::Empty("target set".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(BiasError::Empty("attribute set".into()));
    }
    let k = x.len();
    let s: Vec<f64> = x
        .iter()
        .chain(y)
        .map(|w| association(w.as_ref(), a, b))
        .collect::<Result<_, _>>()?;

    let identity: Vec<bool> = (0..2 * k).map(|i| i < k).collect();
    let statistic = partition_statistic(&s, &identity);

    let mean_x = s[..k].iter().sum::<f64>() / k as f64;
    let mean_y = s[k..].iter().sum::<f64>() / k as f64;
    let std = population_std(&s);
    let scale = s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let effect_size = if std <= 1e-12 * scale {
        0.0
    } else {
        (mean_x - mean_y) / std
    };

    let threshold = statistic - 1e-12 * (1.0 + statistic.abs());
    let partitions = binomial(2 * k as u64, k as u64);
    let (hits, permutations, exact) = if partitions <= cfg.exact_limit {
        let mut hits = 0u64;
        for_each_subset(2 * k, k, |mask| {
            if partition_statistic(&s, mask) >= threshold {
                hits += 1;
            }
        });
        (hits, partitions, true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..2 * k).collect();
        let mut mask = vec![false; 2 * k];
        let mut hits = 1u64;
        for _ in 0..cfg.samples {
            order.partial_shuffle(&mut rng, k);
            mask.iter_mut().for_each(|m| *m = false);
            for &i in &order[..k] {
                mask[i] = true;
            }
            if partition_statistic(&s, &mask) >= threshold {
                hits += 1;
            }
        }
        (hits, cfg.samples as u64 + 1, false)
    };

    Ok(WeatResult {
        statistic,
        effect_size,
        p_value: hits as f64 / permutations as f64,
        permutations,
        exact,
    })
}

/// Calls `f` with a membership mask for every `k`-subset of `0..n`.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[bool])) {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut mask = vec![false; n];
    loop {
        mask.iter_mut().for_each(|m| *m = false);
        for &i in &idx {
            mask[i] = true;
        }
        f(&mask);
        // Advance to the next combination in lexicographic order.
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return;
        }
        idx[pos - 1] += 1;
        for j in pos..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> PermutationConfig {
        PermutationConfig::default()
    }

    #[test]
    fn unit_vector_case() {
        let r = weat(&[[1.0, 0.0]], &[[0.0, 1.0]], &[[1.0, 0.0]], &[[0.0, 1.0]], &cfg()).unwrap();
        assert_eq!(r.statistic, 2.0);
        assert_eq!(r.effect_size, 2.0);
        assert_eq!(r.permutations, 2);
        assert!(r.exact);
        assert_eq!(r.p_value, 0.5);
    }

    #[test]
    fn identical_targets() {
        let x = [[1.0, 0.2], [0.3, 1.0]];
        let r = weat(&x, &x, &[[1.0, 0.0]], &[[0.0, 1.0]], &cfg()).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.effect_size, 0.0);
    }

    #[test]
    fn zero_spread_gives_zero_effect() {
        let x = [[1.0, 1.0]];
        let r = weat(&x, &x, &[[1.0, 0.0]], &[[0.0, 1.0]], &cfg()).unwrap();
        assert_eq!(r.effect_size, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn errors() {
        let v = [[1.0, 0.0]];
        let two = [[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(
            weat(&v, &two, &v, &v, &cfg()),
            Err(BiasError::UnequalTargets { x: 1, y: 2 })
        );
        assert_eq!(weat(&[[0.0, 0.0]], &v, &v, &v, &cfg()), Err(BiasError::ZeroNorm));
        let none: [[f64; 2]; 0] = [];
        assert!(weat(&none, &none, &v, &v, &cfg()).is_err());
        assert!(weat(&v, &v, &none, &v, &cfg()).is_err());
    }

    #[test]
    fn subset_enumeration_counts() {
        for (n, k) in [(2, 1), (6, 3), (10, 5), (4, 0)] {
            let mut count = 0;
            for_each_subset(n, k, |m| {
                assert_eq!(m.iter().filter(|&&b| b).count(), k);
                count += 1;
            });
            assert_eq!(count, binomial(n as u64, k as u64));
        }
        assert_eq!(binomial(16, 8), 12_870);
        assert_eq!(binomial(18, 9), 48_620);
    }

    #[test]
    fn monte_carlo_path_is_seeded() {
        let x: Vec<[f64; 2]> = (0..10).map(|i| [1.0, i as f64 * 0.1]).collect();
        let y: Vec<[f64; 2]> = (0..10).map(|i| [i as f64 * 0.1, 1.0]).collect();
        let c = PermutationConfig { exact_limit: 100, samples: 500, seed: 7 };
        let r1 = weat(&x, &y, &[[1.0, 0.0]], &[[0.0, 1.0]], &c).unwrap();
        let r2 = weat(&x, &y, &[[1.0, 0.0]], &[[0.0, 1.0]], &c).unwrap();
        assert!(!r1.exact);
        assert_eq!(r1.permutations, 501);
        assert_eq!(r1, r2);
        assert!(r1.p_value > 0.0 && r1.p_value < 0.05);
    }

    fn vecs(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.05f64..2.0, 3), n)
    }

    proptest! {
        #[test]
        fn swap_negates(
            (x, y) in (1usize..5).prop_flat_map(|k| (vecs(k), vecs(k))),
            a in vecs(3), b in vecs(2),
        ) {
            let r = weat(&x, &y, &a, &b, &cfg()).unwrap();
            let s = weat(&y, &x, &a, &b, &cfg()).unwrap();
            prop_assert_eq!(r.statistic, -s.statistic);
            prop_assert_eq!(r.effect_size, -s.effect_size);
            // Exchanging attributes also negates.
            let t = weat(&x, &y, &b, &a, &cfg()).unwrap();
            prop_assert!((r.effect_size + t.effect_size).abs() < 1e-12);
            prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        }

        #[test]
        fn attribute_rescaling(
            (x, y) in (1usize..4).prop_flat_map(|k| (vecs(k), vecs(k))),
            mut a in vecs(3), b in vecs(2), c in 0.01f64..100.0,
        ) {
            let r = weat(&x, &y, &a, &b, &cfg()).unwrap();
            a[0].iter_mut().for_each(|v| *v *= c);
            let s = weat(&x, &y, &a, &b, &cfg()).unwrap();
            prop_assert!((r.statistic - s.statistic).abs() < 1e-9);
        }
    }
}
