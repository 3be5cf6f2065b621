//! Status inference: regress the fraction of annotators voting Uncertain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::{self, sigmoid, LinearHeads, TrainConfig};
use super::metrics::{mae_bounds, mean_absolute_error};
use super::tfidf::SparseVec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusModel {
    pub params: LinearHeads,
    pub seed: u64,
}

impl StatusModel {
    /// Probability that the symptom status is Uncertain.
    pub fn predict(&self, x: &SparseVec) -> f64 {
        sigmoid(self.params.logit(0, x))
    }

    pub fn predict_all(&self, rows: &[SparseVec]) -> Vec<f64> {
        use rayon::prelude::*;
        rows.par_iter().map(|x| self.predict(x)).collect()
    }
}

fn check_targets(targets: &[f64]) -> Result<()> {
    if let Some(q) = targets.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(Error::InvalidArgument(format!("status target {q} outside [0, 1]")));
    }
    Ok(())
}

fn as_targets(q: &[f64]) -> Vec<Vec<Option<f64>>> {
    q.iter().map(|&v| vec![Some(v)]).collect()
}

/// Minimises soft-target cross-entropy against the annotator fractions.
pub fn train_status(
    features: &[SparseVec],
    targets: &[f64],
    config: &TrainConfig,
    validation: Option<(&[SparseVec], &[f64])>,
) -> Result<StatusModel> {
    if features.len() != targets.len() {
        return Err(Error::InvalidArgument("features and status targets differ in length".into()));
    }
    if features.is_empty() {
        return Err(Error::Insufficient("no status training rows".into()));
    }
    check_targets(targets)?;
    if let Some((v, q)) = validation {
        if v.len() != q.len() {
            return Err(Error::InvalidArgument("validation features and targets differ in length".into()));
        }
        check_targets(q)?;
    }
    let n_features = features
        .iter()
        .chain(validation.map(|v| v.0).unwrap_or_default())
        .flat_map(|x| x.indices.iter())
        .max()
        .map_or(0, |&m| m as usize + 1);
    let train_t = as_targets(targets);
    let val_t = validation.map(|(_, q)| as_targets(q));
    let criterion = validation
        .zip(val_t.as_deref())
        .map(|((rows, _), t)| linear::objective_criterion(rows, t, &[true]));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = features.len();
    let out = linear::fit(
        LinearHeads::zeros(1, n_features),
        features,
        &train_t,
        &[true],
        config,
        "status",
        || Ok(linear::shuffled_batches(n, config.batch_size, &mut rng)),
        criterion.as_ref().map(|c| c as linear::Criterion<'_>),
    )?;
    Ok(StatusModel {
        params: out.params,
        seed: config.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusEval {
    pub mae: f64,
    pub baseline_mae: f64,
    pub single_annotator_mae: f64,
    pub n: usize,
}

pub fn eval_status(model: &StatusModel, features: &[SparseVec], targets: &[f64]) -> Result<StatusEval> {
    if features.len() != targets.len() {
        return Err(Error::InvalidArgument("features and status targets differ in length".into()));
    }
    if targets.is_empty() {
        return Err(Error::Insufficient("empty status test set".into()));
    }
    check_targets(targets)?;
    let predictions = model.predict_all(features);
    let bounds = mae_bounds(targets);
    Ok(StatusEval {
        mae: mean_absolute_error(&predictions, targets),
        baseline_mae: bounds.baseline_mae,
        single_annotator_mae: bounds.single_annotator_mae,
        n: targets.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> Vec<SparseVec> {
        (0..n)
            .map(|i| SparseVec::from_dense(&[1.0, if i % 2 == 0 { 1.0 } else { 0.0 }]))
            .collect()
    }

    fn config() -> TrainConfig {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 60,
            batch_size: 8,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn constant_half_target_converges_to_half() {
        let x = rows(40);
        let q = vec![0.5; 40];
        let model = train_status(&x, &q, &config(), None).unwrap();
        for p in model.predict_all(&x) {
            assert!((p - 0.5).abs() <= 0.05, "{p}");
        }
    }

    #[test]
    fn zero_targets_push_probability_down() {
        let x = rows(40);
        let model = train_status(&x, &[0.0; 40], &config(), None).unwrap();
        assert!(model.predict_all(&x).iter().all(|&p| p < 0.1));
    }

    #[test]
    fn fractional_targets_and_validation() {
        let x = rows(8);
        let q = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        assert!(train_status(&x, &q, &config(), None).is_ok());
        assert!(train_status(&x, &[1.5; 8], &config(), None).is_err());
        let model = train_status(&x, &q, &config(), Some((&x, &q))).unwrap();
        let eval = eval_status(&model, &x, &q).unwrap();
        assert!(eval.mae.is_finite());
        assert_eq!(eval.n, 8);
    }

    #[test]
    fn diverging_learning_rate_is_reported() {
        let x: Vec<SparseVec> = (0..16).map(|i| SparseVec::from_dense(&[1e150 * f64::from(i)])).collect();
        let q: Vec<f64> = (0..16).map(|i| f64::from(i % 2)).collect();
        let cfg = TrainConfig {
            learning_rate: 1e10,
            ..config()
        };
        assert!(matches!(train_status(&x, &q, &cfg, None), Err(Error::Divergence { .. })));
    }
}
