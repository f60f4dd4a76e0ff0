use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{resolve_members, variant_vector, weat, AttributePair, BiasError, PermutationConfig, WeatResult};
use crate::catalog::{EmojiFamily, SkinTone};
use crate::store::EmbeddingSet;

/// Per-test generator seed: the first 8 bytes of SHA-256(global seed ‖ test name).
pub fn derive_seed(global: u64, test: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update(test.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeatRow {
    pub tone_x: SkinTone,
    pub tone_y: SkinTone,
    /// Role id or attribute pair name.
    pub test: String,
    pub targets: usize,
    pub result: WeatResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub tone_x: SkinTone,
    pub tone_y: SkinTone,
    pub mean_effect_size: Option<f64>,
    pub tests: usize,
    pub significant: usize,
    pub significance_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeatSuite {
    pub rows: Vec<WeatRow>,
    pub summary: Vec<PairSummary>,
    pub alpha: f64,
    /// (tone pair, test) combinations without enough embedded targets.
    pub skipped: usize,
}

impl WeatSuite {
    fn assemble(rows: Vec<WeatRow>, skipped: usize, alpha: f64) -> WeatSuite {
        let summary = SkinTone::pairs()
            .into_iter()
            .map(|(x, y)| {
                let cells: Vec<&WeatRow> = rows.iter().filter(|r| r.tone_x == x && r.tone_y == y).collect();
                let n = cells.len();
                let significant = cells.iter().filter(|r| r.result.p_value < alpha).count();
                PairSummary {
                    tone_x: x,
                    tone_y: y,
                    mean_effect_size: (n > 0)
                        .then(|| cells.iter().map(|r| r.result.effect_size).sum::<f64>() / n as f64),
                    tests: n,
                    significant,
                    significance_rate: (n > 0).then(|| significant as f64 / n as f64),
                }
            })
            .collect();
        WeatSuite {
            rows,
            summary,
            alpha,
            skipped,
        }
    }
}

struct Job<'a> {
    x: SkinTone,
    y: SkinTone,
    test: String,
    xs: Vec<&'a [f64]>,
    ys: Vec<&'a [f64]>,
    pair: usize,
}

fn run_jobs(
    jobs: Vec<Job<'_>>,
    attributes: &[(Vec<&[f64]>, Vec<&[f64]>)],
    cfg: &PermutationConfig,
) -> Result<Vec<WeatRow>, BiasError> {
    jobs.into_par_iter()
        .map(|job| {
            let name = format!("{}-{}/{}", job.x.label(), job.y.label(), job.test);
            let local = PermutationConfig {
                seed: derive_seed(cfg.seed, &name),
                ..*cfg
            };
            let (a, b) = &attributes[job.pair];
            let result = weat(&job.xs, &job.ys, a, b, &local)?;
            Ok(WeatRow {
                tone_x: job.x,
                tone_y: job.y,
                test: job.test,
                targets: job.xs.len(),
                result,
            })
        })
        .collect()
}

fn resolve_pairs<'a>(
    set: &'a EmbeddingSet,
    pairs: &[AttributePair],
) -> Result<Vec<(Vec<&'a [f64]>, Vec<&'a [f64]>)>, BiasError> {
    pairs
        .iter()
        .map(|p| {
            Ok((
                resolve_members(set, &format!("{}/{}", p.name, p.a_label), &p.a)?,
                resolve_members(set, &format!("{}/{}", p.name, p.b_label), &p.b)?,
            ))
        })
        .collect()
}

/// One single-item WEAT per role and tone pair: X is the role at tone x,
/// Y the same role at tone y. Attributes resolve in `attribute_set`, which
/// may be `set` itself.
pub fn weat_roles(
    roles: &[EmojiFamily],
    set: &EmbeddingSet,
    attribute_set: &EmbeddingSet,
    attributes: &AttributePair,
    cfg: &PermutationConfig,
    alpha: f64,
) -> Result<WeatSuite, BiasError> {
    let resolved = resolve_pairs(attribute_set, std::slice::from_ref(attributes))?;
    let mut jobs = Vec::new();
    let mut skipped = 0;
    for (x, y) in SkinTone::pairs() {
        for family in roles {
            match (variant_vector(family, x, set), variant_vector(family, y, set)) {
                (Some(vx), Some(vy)) => jobs.push(Job {
                    x,
                    y,
                    test: family.base.id(),
                    xs: vec![vx],
                    ys: vec![vy],
                    pair: 0,
                }),
                _ => skipped += 1,
            }
        }
    }
    Ok(WeatSuite::assemble(run_jobs(jobs, &resolved, cfg)?, skipped, alpha))
}

/// Tones as targets: for each tone pair, X and Y are the x- and y-toned
/// variants of every family having both, tested against each attribute pair.
pub fn weat_tone_targets(
    families: &[EmojiFamily],
    set: &EmbeddingSet,
    attribute_set: &EmbeddingSet,
    pairs: &[AttributePair],
    cfg: &PermutationConfig,
    alpha: f64,
) -> Result<WeatSuite, BiasError> {
    let resolved = resolve_pairs(attribute_set, pairs)?;
    let mut jobs = Vec::new();
    let mut skipped = 0;
    for (x, y) in SkinTone::pairs() {
        let (xs, ys): (Vec<&[f64]>, Vec<&[f64]>) = families
            .iter()
            .filter_map(|f| Some((variant_vector(f, x, set)?, variant_vector(f, y, set)?)))
            .unzip();
        for (i, p) in pairs.iter().enumerate() {
            if xs.is_empty() {
                skipped += 1;
                continue;
            }
            jobs.push(Job {
                x,
                y,
                test: p.name.clone(),
                xs: xs.clone(),
                ys: ys.clone(),
                pair: i,
            });
        }
    }
    Ok(WeatSuite::assemble(run_jobs(jobs, &resolved, cfg)?, skipped, alpha))
}
