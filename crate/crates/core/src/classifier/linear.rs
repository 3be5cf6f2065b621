//! Multi-head sparse logistic model trained by mini-batch gradient descent.
//!
//! Each head is an independent logistic regression over the same features.
//! Targets are soft (any value in `[0, 1]`) and may be masked per entry. The
//! batch objective is
//!
//! ```text
//! L = sum over active heads h of [ sum_i m_ih * H(y_ih, p_ih) / max(1, sum_i m_ih) ]
//!     + l2 / 2 * sum_h |w_h|^2
//! ```
//!
//! with `H(y, p) = -y ln p - (1 - y) ln(1 - p)` and `p = sigmoid(w.x + b)`.
//! Masked entries contribute neither loss nor gradient.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tfidf::SparseVec;
use crate::{Error, Result};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Cross-entropy of a soft target against `sigmoid(z)`.
pub fn soft_bce_logit(z: f64, y: f64) -> f64 {
    softplus(z) - y * z
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Early-stopping patience in epochs.
    pub patience: usize,
    pub seed: u64,
    pub balanced_sampler: bool,
    /// Heavy-ball momentum; 0 disables it.
    pub momentum: f64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 2.0,
            epochs: 100,
            batch_size: 32,
            patience: 4,
            seed: 0,
            balanced_sampler: false,
            momentum: 0.9,
            l2: 1e-5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if self.patience < 1 {
            return Err(Error::InvalidArgument("patience must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument("momentum must be in [0, 1)".into()));
        }
        if self.l2 < 0.0 {
            return Err(Error::InvalidArgument("l2 must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHeads {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearHeads {
    pub fn zeros(heads: usize, n_features: usize) -> Self {
        Self {
            weights: vec![vec![0.0; n_features]; heads],
            bias: vec![0.0; heads],
        }
    }

    pub fn heads(&self) -> usize {
        self.bias.len()
    }

    pub fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn logit(&self, head: usize, x: &SparseVec) -> f64 {
        x.dot(&self.weights[head]) + self.bias[head]
    }

    pub fn predict(&self, x: &SparseVec) -> Vec<f64> {
        (0..self.heads()).map(|h| sigmoid(self.logit(h, x))).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.bias.iter().chain(self.weights.iter().flatten()).all(|v| v.is_finite())
    }
}

/// Row-major soft targets; `None` marks a missing entry.
pub type Targets = [Vec<Option<f64>>];

/// Objective value and gradient over `batch` (indices into `rows`).
pub fn objective(
    params: &LinearHeads,
    rows: &[SparseVec],
    targets: &Targets,
    batch: &[usize],
    active: &[bool],
    l2: f64,
) -> (f64, LinearHeads) {
    let heads = params.heads();
    let mut grad = LinearHeads::zeros(heads, params.n_features());
    let mut loss = 0.0;
    for h in (0..heads).filter(|&h| active[h]) {
        let observed = batch.iter().filter(|&&i| targets[i][h].is_some()).count();
        if observed == 0 {
            continue;
        }
        let scale = 1.0 / observed as f64;
        for &i in batch {
            let Some(y) = targets[i][h] else { continue };
            let z = params.logit(h, &rows[i]);
            loss += soft_bce_logit(z, y) * scale;
            let dz = (sigmoid(z) - y) * scale;
            for (j, v) in rows[i].iter() {
                grad.weights[h][j] += dz * v;
            }
            grad.bias[h] += dz;
        }
    }
    if l2 > 0.0 {
        for h in (0..heads).filter(|&h| active[h]) {
            for (g, w) in grad.weights[h].iter_mut().zip(&params.weights[h]) {
                loss += 0.5 * l2 * w * w;
                *g += l2 * w;
            }
        }
    }
    (loss, grad)
}

pub(crate) struct FitOutcome {
    pub params: LinearHeads,
    pub epochs_run: usize,
}

pub(crate) fn shuffled_batches(n: usize, batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

/// Validation criterion evaluated after each epoch; lower is better.
pub(crate) type Criterion<'a> = &'a dyn Fn(&LinearHeads) -> f64;

/// Objective (without the L2 term) over every row, as an early-stopping
/// criterion.
pub(crate) fn objective_criterion<'a>(
    rows: &'a [SparseVec],
    targets: &'a Targets,
    active: &'a [bool],
) -> impl Fn(&LinearHeads) -> f64 + 'a {
    move |p: &LinearHeads| {
        let all: Vec<usize> = (0..rows.len()).collect();
        objective(p, rows, targets, &all, active, 0.0).0
    }
}

/// Mini-batch gradient descent with momentum and early stopping on a
/// validation criterion. `next_epoch` supplies the batches of each epoch.
pub(crate) fn fit(
    mut params: LinearHeads,
    rows: &[SparseVec],
    targets: &Targets,
    active: &[bool],
    config: &TrainConfig,
    stage: &'static str,
    mut next_epoch: impl FnMut() -> Result<Vec<Vec<usize>>>,
    validation: Option<Criterion<'_>>,
) -> Result<FitOutcome> {
    config.validate()?;
    let mut velocity = LinearHeads::zeros(params.heads(), params.n_features());
    let mut best: Option<(f64, LinearHeads)> = None;
    let mut stale = 0;
    let mut epochs_run = 0;
    for epoch in 0..config.epochs {
        epochs_run = epoch + 1;
        for batch in next_epoch()? {
            let (loss, grad) = objective(&params, rows, targets, &batch, active, config.l2);
            if !loss.is_finite() {
                return Err(Error::Divergence { stage, epoch, loss });
            }
            for h in 0..params.heads() {
                if !active[h] {
                    continue;
                }
                for ((w, v), g) in params.weights[h]
                    .iter_mut()
                    .zip(velocity.weights[h].iter_mut())
                    .zip(&grad.weights[h])
                {
                    *v = config.momentum * *v + g;
                    *w -= config.learning_rate * *v;
                }
                velocity.bias[h] = config.momentum * velocity.bias[h] + grad.bias[h];
                params.bias[h] -= config.learning_rate * velocity.bias[h];
            }
        }
        if !params.is_finite() {
            return Err(Error::Divergence {
                stage,
                epoch,
                loss: f64::NAN,
            });
        }
        if let Some(criterion) = validation {
            let vloss = criterion(&params);
            if vloss.is_nan() {
                return Err(Error::Divergence {
                    stage,
                    epoch,
                    loss: vloss,
                });
            }
            match &best {
                Some((b, _)) if vloss >= *b => {
                    stale += 1;
                    if stale >= config.patience {
                        break;
                    }
                }
                _ => {
                    best = Some((vloss, params.clone()));
                    stale = 0;
                }
            }
        }
    }
    let params = match best {
        Some((_, p)) => p,
        None => params,
    };
    Ok(FitOutcome { params, epochs_run })
}
