use std::collections::BTreeMap;

use serde::Serialize;

use super::{variant_vector, BiasError};
use crate::catalog::{EmojiFamily, SkinTone};
use crate::similarity::dot;
use crate::store::EmbeddingSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Pos,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub lambda: f64,
    /// Stop once the gradient norm is at or below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Nesterov momentum with gradient restarts instead of plain descent.
    pub accelerated: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            lambda: 0.1,
            tolerance: 1e-8,
            max_iterations: 50_000,
            accelerated: false,
        }
    }
}

/// Logistic classifier scoring the probability of negative sentiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentDirection {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub training_loss: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl SentimentDirection {
    pub fn probability(&self, x: &[f64]) -> Result<f64, BiasError> {
        if x.len() != self.weights.len() {
            return Err(BiasError::DimensionMismatch(self.weights.len(), x.len()));
        }
        Ok(sigmoid(dot(&self.weights, x) + self.bias))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Problem<'a> {
    xs: Vec<&'a [f64]>,
    ys: Vec<f64>,
    lambda: f64,
}

impl Problem<'_> {
    /// Loss and gradient at `(θ, b)`, with the bias stored last in `params`.
    fn evaluate(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let d = params.len() - 1;
        let (theta, b) = (&params[..d], params[d]);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (x, &y) in self.xs.iter().zip(&self.ys) {
            let z = dot(theta, x) + b;
            loss += softplus(z) - y * z;
            let r = sigmoid(z) - y;
            for (g, xi) in grad[..d].iter_mut().zip(x.iter()) {
                *g += r * xi;
            }
            grad[d] += r;
        }
        for (g, t) in grad[..d].iter_mut().zip(theta) {
            *g += 2.0 * self.lambda * t;
        }
        loss + self.lambda * dot(theta, theta)
    }
}

/// Minimises `Σ log-loss + λ‖θ‖²` (bias unpenalised) from zero with step `1/L`.
pub fn train_sentiment_direction(
    labeled: &[(&[f64], Sentiment)],
    cfg: &OptimizerConfig,
) -> Result<SentimentDirection, BiasError> {
    if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
        return Err(BiasError::Training(format!("lambda must be nonnegative, got {}", cfg.lambda)));
    }
    let has = |s: Sentiment| labeled.iter().any(|(_, l)| *l == s);
    if !has(Sentiment::Pos) || !has(Sentiment::Neg) {
        return Err(BiasError::Training("both sentiment labels are required".into()));
    }
    let d = labeled[0].0.len();
    if let Some((x, _)) = labeled.iter().find(|(x, _)| x.len() != d) {
        return Err(BiasError::DimensionMismatch(d, x.len()));
    }
    let problem = Problem {
        xs: labeled.iter().map(|(x, _)| *x).collect(),
        ys: labeled
            .iter()
            .map(|(_, l)| if *l == Sentiment::Neg { 1.0 } else { 0.0 })
            .collect(),
        lambda: cfg.lambda,
    };
    // Hessian ≤ X̃ᵀX̃/4 + 2λI, and ‖X̃ᵀX̃‖ ≤ ‖X̃‖_F².
    let frob: f64 = problem.xs.iter().map(|x| dot(x, x) + 1.0).sum();
    let step = 1.0 / (frob / 4.0 + 2.0 * cfg.lambda);

    let mut params = vec![0.0; d + 1];
    let mut grad = vec![0.0; d + 1];
    let mut loss = problem.evaluate(&params, &mut grad);
    let mut gnorm = dot(&grad, &grad).sqrt();
    let mut iterations = 0;

    // Momentum state for the accelerated variant.
    let mut previous = params.clone();
    let mut look = params.clone();
    let mut look_grad = vec![0.0; d + 1];
    let mut t = 1.0f64;

    while gnorm > cfg.tolerance {
        if iterations == cfg.max_iterations {
            return Err(BiasError::NonConvergence {
                iterations,
                gradient_norm: gnorm,
            });
        }
        iterations += 1;
        if cfg.accelerated {
            problem.evaluate(&look, &mut look_grad);
            let next: Vec<f64> = look.iter().zip(&look_grad).map(|(p, g)| p - step * g).collect();
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            // Restart when the step moves against the gradient at the look-ahead point.
            let restart = look_grad
                .iter()
                .zip(next.iter().zip(&params))
                .map(|(g, (n, p))| g * (n - p))
                .sum::<f64>()
                > 0.0;
            let momentum = if restart { 0.0 } else { (t - 1.0) / t_next };
            t = if restart { 1.0 } else { t_next };
            previous.clone_from(&params);
            params = next;
            look = params
                .iter()
                .zip(&previous)
                .map(|(p, q)| p + momentum * (p - q))
                .collect();
        } else {
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= step * g;
            }
        }
        loss = problem.evaluate(&params, &mut grad);
        gnorm = dot(&grad, &grad).sqrt();
    }

    let bias = params.pop().expect("bias slot");
    if params.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(BiasError::Numeric("non-finite classifier weights".into()));
    }
    Ok(SentimentDirection {
        weights: params,
        bias,
        lambda: cfg.lambda,
        training_loss: loss.max(0.0),
        iterations,
        gradient_norm: gnorm,
    })
}

/// `D_KL(P ‖ U)` in nats. Exactly 0 when all shares are within 1e-12 of each other.
pub fn kl_from_uniform(shares: &[f64]) -> f64 {
    let (lo, hi) = shares
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    if shares.is_empty() || hi - lo < 1e-12 {
        return 0.0;
    }
    let t = shares.len() as f64;
    let kl: f64 = shares
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * (t * p - 1.0).ln_1p())
        .sum();
    if kl > 0.0 {
        kl
    } else {
        // Second-order expansion for near-uniform shares lost to rounding.
        let u = 1.0 / t;
        t / 2.0 * shares.iter().map(|p| (p - u) * (p - u)).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnsbResult {
    pub shares: BTreeMap<String, f64>,
    pub kl_divergence: f64,
}

pub fn rnsb<V: AsRef<[f64]>>(
    direction: &SentimentDirection,
    targets: &BTreeMap<String, V>,
) -> Result<RnsbResult, BiasError> {
    if targets.len() < 2 {
        return Err(BiasError::Empty("RNSB needs at least two targets; target set".into()));
    }
    let probs: Vec<(String, f64)> = targets
        .iter()
        .map(|(id, v)| Ok((id.clone(), direction.probability(v.as_ref())?)))
        .collect::<Result<_, BiasError>>()?;
    let total: f64 = probs.iter().map(|(_, p)| p).sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(BiasError::Numeric("negative-sentiment probabilities sum to zero".into()));
    }
    let shares: BTreeMap<String, f64> = probs.into_iter().map(|(id, p)| (id, p / total)).collect();
    let values: Vec<f64> = shares.values().copied().collect();
    Ok(RnsbResult {
        kl_divergence: kl_from_uniform(&values),
        shares,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnsbRoleRow {
    pub role: String,
    pub name: String,
    /// Share per tone present for this role.
    pub shares: BTreeMap<SkinTone, f64>,
    pub kl_divergence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnsbSuite {
    pub rows: Vec<RnsbRoleRow>,
    pub mean_kl: Option<f64>,
    pub skipped: usize,
}

/// RNSB over the embedded tone variants of each role.
pub fn rnsb_roles(
    roles: &[EmojiFamily],
    set: &EmbeddingSet,
    direction: &SentimentDirection,
) -> Result<RnsbSuite, BiasError> {
    let mut rows = Vec::new();
    let mut skipped = 0;
    for family in roles {
        let targets: BTreeMap<String, &[f64]> = SkinTone::ALL
            .iter()
            .filter_map(|&tone| Some((tone.label().to_string(), variant_vector(family, tone, set)?)))
            .collect();
        if targets.len() < 2 {
            skipped += 1;
            continue;
        }
        let result = rnsb(direction, &targets)?;
        let shares = SkinTone::ALL
            .iter()
            .filter_map(|&tone| Some((tone, *result.shares.get(tone.label())?)))
            .collect();
        rows.push(RnsbRoleRow {
            role: family.base.id(),
            name: family.name().to_string(),
            shares,
            kl_divergence: result.kl_divergence,
        });
    }
    let mean_kl = (!rows.is_empty())
        .then(|| rows.iter().map(|r| r.kl_divergence).sum::<f64>() / rows.len() as f64);
    Ok(RnsbSuite { rows, mean_kl, skipped })
}
