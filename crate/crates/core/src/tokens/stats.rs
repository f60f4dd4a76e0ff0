use std::collections::BTreeMap;

use serde::Serialize;

use super::{AuditError, TokenManifest};
use crate::catalog::SkinTone;

/// Distribution of token counts over a set of ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenStats {
    pub n: usize,
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    /// Most frequent count; ties go to the smaller count.
    pub mode: usize,
    pub mode_frequency: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Statistics over the counts of exactly `ids`. Quartiles use inclusive
/// linear interpolation between order statistics.
pub fn summarize<S: AsRef<str>>(manifest: &TokenManifest, ids: &[S]) -> Result<TokenStats, AuditError> {
    let mut counts = ids
        .iter()
        .map(|id| {
            manifest
                .count(id.as_ref())
                .ok_or_else(|| AuditError::MissingId(id.as_ref().to_string()))
        })
        .collect::<Result<Vec<usize>, _>>()?;
    if counts.is_empty() {
        return Err(AuditError::Empty);
    }
    counts.sort_unstable();

    let n = counts.len();
    let total: usize = counts.iter().sum();
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &counts {
        *freq.entry(c).or_default() += 1;
    }
    // BTreeMap iterates ascending, so the first maximum is the smallest count.
    let (mode, mode_frequency) = freq
        .iter()
        .fold((0, 0), |best, (&c, &f)| if f > best.1 { (c, f) } else { best });

    Ok(TokenStats {
        n,
        mean: total as f64 / n as f64,
        min: counts[0],
        max: counts[n - 1],
        mode,
        mode_frequency,
        q1: quantile(&counts, 0.25),
        median: quantile(&counts, 0.5),
        q3: quantile(&counts, 0.75),
    })
}

fn quantile(sorted: &[usize], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] as f64 + frac * (sorted[hi] as f64 - sorted[lo] as f64)
}

/// A tone whose modifier costs more tokens than the cheapest one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryFinding {
    pub tone: SkinTone,
    pub count: usize,
    pub minimum: usize,
    /// `count / minimum`.
    pub ratio: f64,
}

/// One finding per tone whose count exceeds the minimum; empty when all
/// counts are equal.
pub fn asymmetry_flags(lengths: &BTreeMap<SkinTone, usize>) -> Vec<AsymmetryFinding> {
    let Some(&minimum) = lengths.values().min() else {
        return Vec::new();
    };
    lengths
        .iter()
        .filter(|(_, &c)| c > minimum)
        .map(|(&tone, &count)| AsymmetryFinding {
            tone,
            count,
            minimum,
            ratio: count as f64 / minimum as f64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn manifest(counts: &[usize]) -> (TokenManifest, Vec<String>) {
        let mut m = TokenManifest::new("m", "t");
        let ids: Vec<String> = (0..counts.len()).map(|i| format!("id{i}")).collect();
        for (id, &c) in ids.iter().zip(counts) {
            m.insert(id.clone(), vec![7; c]);
        }
        (m, ids)
    }

    #[test]
    fn single_entry() {
        let (m, ids) = manifest(&[7]);
        let s = summarize(&m, &ids).unwrap();
        assert_eq!(s.mean, 7.0);
        assert_eq!((s.min, s.max, s.mode, s.mode_frequency), (7, 7, 7, 1));
        assert_eq!((s.q1, s.median, s.q3), (7.0, 7.0, 7.0));
    }

    #[test]
    fn mode_tie_breaks_low() {
        let (m, ids) = manifest(&[3, 2, 3, 2]);
        let s = summarize(&m, &ids).unwrap();
        assert_eq!(s.mode, 2);
        assert_eq!(s.mode_frequency, 2);
    }

    #[test]
    fn inclusive_quartiles() {
        // numpy.percentile([1,2,3,4,10], [25,50,75]) == [2, 3, 4]
        let (m, ids) = manifest(&[10, 1, 4, 2, 3]);
        let s = summarize(&m, &ids).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        // numpy.percentile([1,2,3,4], [25,50,75]) == [1.75, 2.5, 3.25]
        let (m, ids) = manifest(&[1, 2, 3, 4]);
        let s = summarize(&m, &ids).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.75, 2.5, 3.25));
    }

    #[test]
    fn missing_id_named() {
        let (m, _) = manifest(&[1]);
        match summarize(&m, &["nope"]) {
            Err(AuditError::MissingId(id)) => assert_eq!(id, "nope"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(summarize::<&str>(&m, &[]), Err(AuditError::Empty)));
    }

    fn tones(counts: [usize; 5]) -> BTreeMap<SkinTone, usize> {
        SkinTone::MODIFIERS.iter().copied().zip(counts).collect()
    }

    #[test]
    fn asymmetry_cases() {
        assert!(asymmetry_flags(&tones([3, 3, 3, 3, 3])).is_empty());
        let f = asymmetry_flags(&tones([1, 1, 1, 1, 2]));
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].tone, SkinTone::Dark);
        assert_eq!(f[0].ratio, 2.0);
    }

    proptest! {
        #[test]
        fn summary_invariants(counts in prop::collection::vec(1usize..30, 1..60), seed in any::<u64>()) {
            let (m, ids) = manifest(&counts);
            let s = summarize(&m, &ids).unwrap();
            prop_assert!(s.min as f64 <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max as f64);
            prop_assert!(s.min <= s.mode && s.mode <= s.max);
            prop_assert!(s.min as f64 <= s.mean && s.mean <= s.max as f64);

            // Permutation invariance.
            let mut shuffled = ids.clone();
            let k = shuffled.len();
            shuffled.rotate_left((seed as usize) % k);
            shuffled.reverse();
            prop_assert_eq!(summarize(&m, &shuffled).unwrap(), s.clone());

            // Duplicating the id list keeps the ordering invariants.
            let doubled: Vec<String> = ids.iter().chain(ids.iter()).cloned().collect();
            let d = summarize(&m, &doubled).unwrap();
            prop_assert!(d.min as f64 <= d.q1 && d.q1 <= d.median && d.median <= d.q3 && d.q3 <= d.max as f64);
            prop_assert_eq!(d.mode, s.mode);
            prop_assert!((d.mean - s.mean).abs() < 1e-12);
        }

        #[test]
        fn asymmetry_empty_iff_flat(counts in prop::array::uniform5(1usize..8)) {
            let map = tones(counts);
            let flat = counts.iter().max() == counts.iter().min();
            prop_assert_eq!(asymmetry_flags(&map).is_empty(), flat);
        }
    }
}
