//! Threshold-free and thresholded classification metrics, plus the status
//! MAE reference bounds.

use serde::{Deserialize, Serialize};

/// Area under the ROC curve, computed as the Mann-Whitney statistic with
/// half credit for tied positive/negative pairs. `None` when either class is
/// absent.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len());
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Walk tie groups in ascending score order.
    let mut credit = 0.0;
    let mut neg_below = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]].total_cmp(&scores[order[i]]).is_eq() {
            j += 1;
        }
        let (mut pos_here, mut neg_here) = (0usize, 0usize);
        for &k in &order[i..j] {
            if labels[k] {
                pos_here += 1;
            } else {
                neg_here += 1;
            }
        }
        credit += pos_here as f64 * (neg_below as f64 + 0.5 * neg_here as f64);
        neg_below += neg_here;
        i = j;
    }
    Some(credit / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_predictions(predicted: impl IntoIterator<Item = bool>, labels: impl IntoIterator<Item = bool>) -> Self {
        let mut c = Confusion::default();
        for (p, l) in predicted.into_iter().zip(labels) {
            match (p, l) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    /// F1 of the positive class; 0 when there are no positive predictions or
    /// labels at all.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    pub fn precision(&self) -> Option<f64> {
        (self.tp + self.fp > 0).then(|| self.tp as f64 / (self.tp + self.fp) as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        (self.tp + self.fn_ > 0).then(|| self.tp as f64 / (self.tp + self.fn_) as f64)
    }
}

/// Positive-class F1 with `score >= threshold` predicted positive.
pub fn f1_at(scores: &[f64], labels: &[bool], threshold: f64) -> f64 {
    Confusion::from_predictions(scores.iter().map(|&s| s >= threshold), labels.iter().copied()).f1()
}

pub fn mean_absolute_error(predictions: &[f64], targets: &[f64]) -> f64 {
    assert_eq!(predictions.len(), targets.len());
    if targets.is_empty() {
        return 0.0;
    }
    predictions.iter().zip(targets).map(|(p, q)| (p - q).abs()).sum::<f64>() / targets.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaeBounds {
    /// Constant predictor at the test-set mean (the "no model" reference).
    pub baseline_mae: f64,
    /// Expected deviation of one random annotator's vote, mean of 2q(1-q).
    pub single_annotator_mae: f64,
}

pub fn mae_bounds(targets: &[f64]) -> MaeBounds {
    if targets.is_empty() {
        return MaeBounds {
            baseline_mae: 0.0,
            single_annotator_mae: 0.0,
        };
    }
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let baseline_mae = targets.iter().map(|q| (mean - q).abs()).sum::<f64>() / n;
    let single_annotator_mae = targets.iter().map(|q| 2.0 * q * (1.0 - q)).sum::<f64>() / n;
    MaeBounds {
        baseline_mae,
        single_annotator_mae,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.7, 0.1], &[true, false, true, false]), Some(0.75));
        assert_eq!(auc(&[0.2, 0.4, 0.6], &[false, false, true]), Some(1.0));
        assert_eq!(auc(&[0.5, 0.5], &[true, false]), Some(0.5));
        assert_eq!(auc(&[0.5, 0.7], &[true, true]), None);
    }

    #[test]
    fn auc_random_is_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scores: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
        let labels: Vec<bool> = (0..1000).map(|i| i % 2 == 0).collect();
        assert_abs_diff_eq!(auc(&scores, &labels).unwrap(), 0.5, epsilon = 0.05);
    }

    #[test]
    fn f1_and_mae() {
        let c = Confusion { tp: 1, fp: 1, fn_: 1, tn: 0 };
        assert_eq!(c.f1(), 0.5);
        assert_eq!(f1_at(&[0.9, 0.2], &[true, false], 0.5), 1.0);
        assert_eq!(f1_at(&[0.5], &[true], 0.5), 1.0);
        assert_eq!(mean_absolute_error(&[0.5, 0.5], &[0.0, 1.0]), 0.5);
    }

    #[test]
    fn bounds_examples() {
        let b = mae_bounds(&[0.0, 1.0]);
        assert_eq!(b.baseline_mae, 0.5);
        assert_eq!(mae_bounds(&[0.0, 0.0, 0.0]).single_annotator_mae, 0.0);
        assert_abs_diff_eq!(mae_bounds(&[1.0 / 3.0]).single_annotator_mae, 4.0 / 9.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn auc_matches_pairs_and_is_rank_invariant(
            data in proptest::collection::vec((0u8..10, any::<bool>()), 2..60)
        ) {
            let scores: Vec<f64> = data.iter().map(|(s, _)| f64::from(*s) / 10.0).collect();
            let labels: Vec<bool> = data.iter().map(|(_, l)| *l).collect();
            if let Some(a) = auc(&scores, &labels) {
                prop_assert!((a - pairwise_auc(&scores, &labels)).abs() < 1e-12);
                let squashed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
                prop_assert!((auc(&squashed, &labels).unwrap() - a).abs() < 1e-12);
            }
        }

        #[test]
        fn f1_matches_confusion_count(
            data in proptest::collection::vec((0.0f64..1.0, any::<bool>()), 1..50)
        ) {
            let scores: Vec<f64> = data.iter().map(|d| d.0).collect();
            let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
            let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
            for (s, l) in scores.iter().zip(&labels) {
                let p = *s >= 0.5;
                if p && *l { tp += 1.0 } else if p { fp += 1.0 } else if *l { fn_ += 1.0 }
            }
            let expect = if tp + fp + fn_ == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) };
            prop_assert_eq!(f1_at(&scores, &labels, 0.5), expect);
        }
    }
}
