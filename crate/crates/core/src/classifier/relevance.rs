//! Multi-label symptom relevance under missing labels.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::{self, sigmoid, LinearHeads, TrainConfig};
use super::metrics::{auc, Confusion};
use super::sampler::balanced_epoch;
use super::tfidf::SparseVec;
use crate::annotations::GoldLabel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelState {
    Positive,
    Negative,
    Missing,
}

impl LabelState {
    pub fn target(self) -> Option<f64> {
        match self {
            LabelState::Positive => Some(1.0),
            LabelState::Negative => Some(0.0),
            LabelState::Missing => None,
        }
    }

    pub fn observed(self) -> Option<bool> {
        match self {
            LabelState::Positive => Some(true),
            LabelState::Negative => Some(false),
            LabelState::Missing => None,
        }
    }
}

/// Per (sentence, symptom) label state. Columns follow `symptoms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMask {
    pub symptoms: Vec<String>,
    pub rows: Vec<Vec<LabelState>>,
}

impl LabelMask {
    pub fn new(symptoms: Vec<String>) -> Self {
        Self { symptoms, rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<LabelState>) -> Result<()> {
        if row.len() != self.symptoms.len() {
            return Err(Error::DimensionMismatch {
                id: format!("label row {}", self.rows.len()),
                expected: self.symptoms.len(),
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Row from a merged gold label: observed symptoms are positive or
    /// negative, everything else missing.
    pub fn push_gold(&mut self, gold: &GoldLabel) -> Result<()> {
        for s in gold.relevant.iter().chain(&gold.observed) {
            if !self.symptoms.contains(s) {
                return Err(Error::UnknownId {
                    kind: "symptom",
                    id: s.clone(),
                });
            }
        }
        let row = self
            .symptoms
            .iter()
            .map(|s| {
                if gold.relevant.contains(s) {
                    LabelState::Positive
                } else if gold.observed.contains(s) {
                    LabelState::Negative
                } else {
                    LabelState::Missing
                }
            })
            .collect();
        self.rows.push(row);
        Ok(())
    }

    /// Control sentences are negative for every symptom.
    pub fn push_control(&mut self) {
        self.rows.push(vec![LabelState::Negative; self.symptoms.len()]);
    }

    pub fn from_gold(symptoms: Vec<String>, gold: &[GoldLabel]) -> Result<Self> {
        let mut mask = Self::new(symptoms);
        for g in gold {
            mask.push_gold(g)?;
        }
        Ok(mask)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = LabelState> + '_ {
        self.rows.iter().map(move |r| r[j])
    }

    pub fn count(&self, state: LabelState) -> usize {
        self.rows.iter().flatten().filter(|&&s| s == state).count()
    }

    fn targets(&self, mode: MaskMode) -> Vec<Vec<Option<f64>>> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| match (mode, s) {
                        (MaskMode::NaiveNegative, LabelState::Missing) => Some(0.0),
                        _ => s.target(),
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    NaiveNegative,
    LossMask,
    LabelEnhance,
}

impl MaskMode {
    pub const ALL: [MaskMode; 3] = [MaskMode::NaiveNegative, MaskMode::LossMask, MaskMode::LabelEnhance];

    pub fn as_str(self) -> &'static str {
        match self {
            MaskMode::NaiveNegative => "naive_negative",
            MaskMode::LossMask => "loss_mask",
            MaskMode::LabelEnhance => "label_enhance",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown mask mode {s:?}")))
    }
}

impl fmt::Display for MaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Training rows: features, labels, and which rows come from the control pool.
#[derive(Debug, Clone)]
pub struct RelevanceData {
    pub features: Vec<SparseVec>,
    pub labels: LabelMask,
    pub is_control: Vec<bool>,
}

impl RelevanceData {
    pub fn new(features: Vec<SparseVec>, labels: LabelMask, is_control: Vec<bool>) -> Result<Self> {
        if features.len() != labels.len() || features.len() != is_control.len() {
            return Err(Error::InvalidArgument(format!(
                "relevance data lengths differ: {} features, {} labels, {} control flags",
                features.len(),
                labels.len(),
                is_control.len()
            )));
        }
        Ok(Self {
            features,
            labels,
            is_control,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceModel {
    pub symptoms: Vec<String>,
    pub params: LinearHeads,
    pub mode: MaskMode,
    pub seed: u64,
    /// Heads that received gradient updates; the rest predict a constant.
    pub trained: Vec<bool>,
}

impl RelevanceModel {
    pub fn predict(&self, x: &SparseVec) -> Vec<f64> {
        self.params.predict(x)
    }

    pub fn predict_all(&self, rows: &[SparseVec]) -> Vec<Vec<f64>> {
        use rayon::prelude::*;
        rows.par_iter().map(|x| self.predict(x)).collect()
    }

    pub fn predict_symptom(&self, j: usize, x: &SparseVec) -> f64 {
        sigmoid(self.params.logit(j, x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSymptom {
    pub symptom: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhanceReport {
    /// Threshold per enhanced symptom.
    pub thresholds: BTreeMap<String, f64>,
    /// Achieved TNR on the observed negatives the threshold was fit on.
    pub achieved_tnr: BTreeMap<String, f64>,
    /// Missing entries converted to negatives, per symptom.
    pub converted: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub mode: MaskMode,
    pub skipped: Vec<SkippedSymptom>,
    pub epochs_run: usize,
    pub enhancement: Option<EnhanceReport>,
}

/// Smallest threshold whose achieved TNR on the given negatives is at least
/// `target_tnr`, with scores strictly below the threshold called negative.
/// `negatives[i]` marks which scores belong to known negatives.
pub fn tnr_threshold(scores: &[f64], negatives: &[bool], target_tnr: f64) -> Result<f64> {
    if scores.len() != negatives.len() {
        return Err(Error::InvalidArgument("scores and negative flags differ in length".into()));
    }
    if !(target_tnr > 0.0 && target_tnr <= 1.0) {
        return Err(Error::InvalidArgument(format!("target TNR must be in (0, 1], got {target_tnr}")));
    }
    let mut neg: Vec<f64> = scores
        .iter()
        .zip(negatives)
        .filter(|(_, &n)| n)
        .map(|(&s, _)| s)
        .collect();
    if neg.is_empty() {
        return Err(Error::Insufficient("no known negatives for TNR threshold".into()));
    }
    if neg.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("non-finite score".into()));
    }
    neg.sort_by(f64::total_cmp);
    let n = neg.len();
    let meets = |k: usize| k as f64 / n as f64 >= target_tnr;
    let mut k = ((target_tnr * n as f64).ceil() as usize).clamp(1, n);
    while k > 1 && meets(k - 1) {
        k -= 1;
    }
    while !meets(k) {
        k += 1;
    }
    Ok(neg[k - 1].next_up())
}

/// Fraction of known negatives scored strictly below `threshold`.
pub fn achieved_tnr(scores: &[f64], negatives: &[bool], threshold: f64) -> Option<f64> {
    let (mut below, mut n) = (0usize, 0usize);
    for (&s, &is_neg) in scores.iter().zip(negatives) {
        if is_neg {
            n += 1;
            below += usize::from(s < threshold);
        }
    }
    (n > 0).then(|| below as f64 / n as f64)
}

/// Converts missing entries the teacher scores below a per-symptom TNR
/// threshold into negatives. Thresholds are fit on the observed negatives
/// of annotated (non-control) rows, falling back to all observed negatives.
pub fn enhance_labels(
    teacher: &RelevanceModel,
    data: &RelevanceData,
    target_tnr: f64,
) -> Result<(LabelMask, EnhanceReport)> {
    let mut labels = data.labels.clone();
    let scores = teacher.predict_all(&data.features);
    let mut report = EnhanceReport {
        thresholds: BTreeMap::new(),
        achieved_tnr: BTreeMap::new(),
        converted: BTreeMap::new(),
        warnings: Vec::new(),
    };
    for (j, symptom) in data.labels.symptoms.iter().enumerate() {
        let column: Vec<f64> = scores.iter().map(|r| r[j]).collect();
        let annotated_neg: Vec<bool> = data
            .labels
            .rows
            .iter()
            .zip(&data.is_control)
            .map(|(r, &c)| !c && r[j] == LabelState::Negative)
            .collect();
        let negatives = if annotated_neg.iter().any(|&n| n) {
            annotated_neg
        } else {
            data.labels.rows.iter().map(|r| r[j] == LabelState::Negative).collect()
        };
        let threshold = match tnr_threshold(&column, &negatives, target_tnr) {
            Ok(t) => t,
            Err(e) => {
                report.warnings.push(format!("{symptom}: not enhanced ({e})"));
                continue;
            }
        };
        let mut converted = 0;
        for (row, &p) in labels.rows.iter_mut().zip(&column) {
            if row[j] == LabelState::Missing && p < threshold {
                row[j] = LabelState::Negative;
                converted += 1;
            }
        }
        let tnr = achieved_tnr(&column, &negatives, threshold).unwrap_or(0.0);
        report.thresholds.insert(symptom.clone(), threshold);
        report.achieved_tnr.insert(symptom.clone(), tnr);
        report.converted.insert(symptom.clone(), converted);
    }
    Ok((labels, report))
}

fn logit_clamped(p: f64) -> f64 {
    let p = p.clamp(1e-3, 1.0 - 1e-3);
    (p / (1.0 - p)).ln()
}

/// Trains with the given targets. Symptoms lacking a positive or a negative
/// among their training targets are skipped: they keep a constant logit at the
/// observed prevalence.
fn train_heads(
    data: &RelevanceData,
    labels: &LabelMask,
    mode: MaskMode,
    config: &TrainConfig,
    validation: Option<(&[SparseVec], &LabelMask)>,
    n_features: usize,
) -> Result<(RelevanceModel, Vec<SkippedSymptom>, usize)> {
    config.validate()?;
    let targets = labels.targets(mode);
    let heads = labels.symptoms.len();
    let mut params = LinearHeads::zeros(heads, n_features);
    let mut active = vec![false; heads];
    let mut skipped = Vec::new();
    for (j, symptom) in labels.symptoms.iter().enumerate() {
        let (mut pos, mut neg) = (0usize, 0usize);
        for row in &targets {
            match row[j] {
                Some(y) if y > 0.5 => pos += 1,
                Some(_) => neg += 1,
                None => {}
            }
        }
        if pos > 0 && neg > 0 {
            active[j] = true;
        } else {
            let reason = match (pos, neg) {
                (0, 0) => "no observed labels".to_string(),
                (0, _) => format!("no positives ({neg} negatives)"),
                _ => format!("no negatives ({pos} positives)"),
            };
            let prevalence = if pos + neg == 0 { 0.5 } else { pos as f64 / (pos + neg) as f64 };
            params.bias[j] = logit_clamped(prevalence);
            skipped.push(SkippedSymptom {
                symptom: symptom.clone(),
                reason,
            });
        }
    }
    if !active.iter().any(|&a| a) {
        return Err(Error::Insufficient(
            "no symptom has both a positive and a negative training label".into(),
        ));
    }
    let criterion = validation.map(|(rows, mask)| {
        let active = active.clone();
        move |p: &LinearHeads| -observed_macro_auc(p, rows, mask, &active)
    });

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let annotated: Vec<usize> = (0..data.len()).filter(|&i| !data.is_control[i]).collect();
    let control: Vec<usize> = (0..data.len()).filter(|&i| data.is_control[i]).collect();
    let balanced = config.balanced_sampler;
    if balanced && (annotated.is_empty() || control.is_empty()) {
        return Err(Error::InvalidArgument(
            "balanced sampler needs both annotated and control rows".into(),
        ));
    }
    let n = data.len();
    let next_epoch = || {
        if balanced {
            balanced_epoch(&annotated, &control, config.batch_size, &mut rng)
        } else {
            Ok(linear::shuffled_batches(n, config.batch_size, &mut rng))
        }
    };
    let out = linear::fit(
        params,
        &data.features,
        &targets,
        &active,
        config,
        "relevance",
        next_epoch,
        criterion.as_ref().map(|c| c as linear::Criterion<'_>),
    )?;
    let model = RelevanceModel {
        symptoms: labels.symptoms.clone(),
        params: out.params,
        mode,
        seed: config.seed,
        trained: active,
    };
    Ok((model, skipped, out.epochs_run))
}

/// Macro AUC of the active heads over observed labels; heads whose observed
/// labels are single-class are left out. Zero when no head is evaluable.
fn observed_macro_auc(params: &LinearHeads, rows: &[SparseVec], mask: &LabelMask, active: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut k = 0usize;
    for (j, _) in active.iter().enumerate().filter(|(_, &a)| a) {
        let mut s = Vec::new();
        let mut l = Vec::new();
        for (x, state) in rows.iter().zip(mask.column(j)) {
            if let Some(y) = state.observed() {
                s.push(params.logit(j, x));
                l.push(y);
            }
        }
        if let Some(a) = auc(&s, &l) {
            total += a;
            k += 1;
        }
    }
    if k == 0 {
        0.0
    } else {
        total / k as f64
    }
}

/// Target TNR used by label enhancement.
pub const ENHANCE_TNR: f64 = 0.9;

/// Trains the relevance model in one of the three missing-label regimes.
/// `validation` drives early stopping; without it all epochs run.
pub fn train_relevance(
    data: &RelevanceData,
    config: &TrainConfig,
    mode: MaskMode,
    validation: Option<(&[SparseVec], &LabelMask)>,
) -> Result<(RelevanceModel, TrainReport)> {
    if data.is_empty() {
        return Err(Error::Insufficient("no training rows".into()));
    }
    if let Some((rows, mask)) = validation {
        if rows.len() != mask.len() || mask.symptoms != data.labels.symptoms {
            return Err(Error::InvalidArgument("validation set does not match training labels".into()));
        }
    }
    let n_features = data
        .features
        .iter()
        .chain(validation.map(|v| v.0).unwrap_or_default())
        .flat_map(|x| x.indices.iter())
        .max()
        .map_or(0, |&m| m as usize + 1);
    match mode {
        MaskMode::NaiveNegative | MaskMode::LossMask => {
            let (model, skipped, epochs_run) =
                train_heads(data, &data.labels, mode, config, validation, n_features)?;
            Ok((
                model,
                TrainReport {
                    mode,
                    skipped,
                    epochs_run,
                    enhancement: None,
                },
            ))
        }
        MaskMode::LabelEnhance => {
            let (teacher, _, _) =
                train_heads(data, &data.labels, MaskMode::LossMask, config, validation, n_features)?;
            let (enhanced, report) = enhance_labels(&teacher, data, ENHANCE_TNR)?;
            let (mut student, skipped, epochs_run) =
                train_heads(data, &enhanced, MaskMode::LossMask, config, validation, n_features)?;
            student.mode = MaskMode::LabelEnhance;
            Ok((
                student,
                TrainReport {
                    mode,
                    skipped,
                    epochs_run,
                    enhancement: Some(report),
                },
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymptomScores {
    pub auc: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceEval {
    pub per_symptom: BTreeMap<String, SymptomScores>,
    pub macro_auc: f64,
    pub macro_f1: f64,
    /// Symptoms without both classes among observed test labels.
    pub excluded: Vec<String>,
}

/// Per-symptom AUC and F1 over observed test labels; missing entries are ignored.
pub fn eval_relevance(
    model: &RelevanceModel,
    features: &[SparseVec],
    labels: &LabelMask,
    threshold: f64,
) -> Result<RelevanceEval> {
    if features.len() != labels.len() {
        return Err(Error::InvalidArgument("features and labels differ in length".into()));
    }
    if labels.symptoms != model.symptoms {
        return Err(Error::Validation("test labels use a different symptom order than the model".into()));
    }
    let scores = model.predict_all(features);
    let mut per_symptom = BTreeMap::new();
    let mut excluded = Vec::new();
    for (j, symptom) in labels.symptoms.iter().enumerate() {
        let mut s = Vec::new();
        let mut l = Vec::new();
        for (row, state) in scores.iter().zip(labels.column(j)) {
            if let Some(y) = state.observed() {
                s.push(row[j]);
                l.push(y);
            }
        }
        match auc(&s, &l) {
            Some(a) => {
                let f1 = Confusion::from_predictions(s.iter().map(|&p| p >= threshold), l.iter().copied()).f1();
                per_symptom.insert(symptom.clone(), SymptomScores { auc: a, f1 });
            }
            None => excluded.push(symptom.clone()),
        }
    }
    if per_symptom.is_empty() {
        return Err(Error::Insufficient("no evaluable symptom in the test set".into()));
    }
    let k = per_symptom.len() as f64;
    let macro_auc = per_symptom.values().map(|v| v.auc).sum::<f64>() / k;
    let macro_f1 = per_symptom.values().map(|v| v.f1).sum::<f64>() / k;
    Ok(RelevanceEval {
        per_symptom,
        macro_auc,
        macro_f1,
        excluded,
    })
}

/// Column index per symptom id.
pub fn symptom_index(symptoms: &[String]) -> HashMap<&str, usize> {
    symptoms.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use LabelState::*;

    fn separable() -> RelevanceData {
        // feature 0 marks symptom a, feature 1 marks symptom b, feature 2 is noise
        let mut features = Vec::new();
        let mut labels = LabelMask::new(vec!["a".into(), "b".into()]);
        for i in 0..40 {
            let a = i % 2 == 0;
            let b = i % 3 == 0;
            let dense = [f64::from(u8::from(a)), f64::from(u8::from(b)), 1.0];
            features.push(SparseVec::from_dense(&dense));
            labels
                .push(vec![if a { Positive } else { Negative }, if b { Positive } else { Negative }])
                .unwrap();
        }
        RelevanceData::new(features, labels, vec![false; 40]).unwrap()
    }

    fn quick() -> TrainConfig {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 40,
            batch_size: 8,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn separable_fixture_reaches_perfect_auc() {
        let data = separable();
        let (model, report) = train_relevance(&data, &quick(), MaskMode::LossMask, None).unwrap();
        assert!(report.skipped.is_empty());
        let eval = eval_relevance(&model, &data.features, &data.labels, 0.5).unwrap();
        assert_eq!(eval.per_symptom["a"].auc, 1.0);
        assert_eq!(eval.per_symptom["b"].auc, 1.0);
    }

    #[test]
    fn fully_missing_symptom_is_skipped() {
        let mut data = separable();
        for row in &mut data.labels.rows {
            row[1] = Missing;
        }
        let (model, report) = train_relevance(&data, &quick(), MaskMode::LossMask, None).unwrap();
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.skipped[0].symptom, "b");
        assert!(!model.trained[1]);
        assert!(model.params.weights[1].iter().all(|&w| w == 0.0));
        // naive mode turns the missing column into all negatives: still skipped
        let (_, report) = train_relevance(&data, &quick(), MaskMode::NaiveNegative, None).unwrap();
        assert_eq!(report.skipped[0].reason, "no positives (40 negatives)");
    }

    #[test]
    fn training_is_deterministic() {
        let data = separable();
        let a = train_relevance(&data, &quick(), MaskMode::LabelEnhance, None).unwrap();
        let b = train_relevance(&data, &quick(), MaskMode::LabelEnhance, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn masked_entries_are_invisible_to_the_gradient() {
        let data = separable();
        let mut masked = data.labels.clone();
        for (i, row) in masked.rows.iter_mut().enumerate() {
            if i % 4 == 1 {
                row[0] = Missing;
            }
        }
        let targets = masked.targets(MaskMode::LossMask);
        let kept: Vec<usize> = (0..data.len()).filter(|i| i % 4 != 1).collect();
        let all: Vec<usize> = (0..data.len()).collect();
        let mut p = LinearHeads::zeros(2, 3);
        p.weights[0] = vec![0.3, -0.2, 0.1];
        let active = [true, false];
        let (l1, g1) = linear::objective(&p, &data.features, &targets, &all, &active, 0.0);
        let (l2, g2) = linear::objective(&p, &data.features, &targets, &kept, &active, 0.0);
        assert!((l1 - l2).abs() <= 1e-12);
        for (a, b) in g1.weights[0].iter().zip(&g2.weights[0]) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn tnr_threshold_examples() {
        let scores: Vec<f64> = (1..=10).map(|i| f64::from(i) / 10.0).collect();
        let neg = vec![true; 10];
        let t = tnr_threshold(&scores, &neg, 0.9).unwrap();
        assert_eq!(achieved_tnr(&scores, &neg, t), Some(0.9));
        assert!(t > 0.9 && t < 1.0);
        let t = tnr_threshold(&[0.0; 5], &[true; 5], 0.9).unwrap();
        assert!(t > 0.0);
        assert_eq!(achieved_tnr(&[0.0; 5], &[true; 5], t), Some(1.0));
        let t = tnr_threshold(&scores, &neg, 1.0).unwrap();
        assert_eq!(t, 1.0f64.next_up());
        assert!(tnr_threshold(&scores, &[false; 10], 0.9).is_err());
    }

    #[test]
    fn enhancement_only_moves_missing_to_negative() {
        let mut data = separable();
        for (i, row) in data.labels.rows.iter_mut().enumerate() {
            if i % 5 == 0 {
                row[0] = Missing;
            }
        }
        let (teacher, _) = train_relevance(&data, &quick(), MaskMode::LossMask, None).unwrap();
        let (enhanced, report) = enhance_labels(&teacher, &data, 0.9).unwrap();
        for (before, after) in data.labels.rows.iter().zip(&enhanced.rows) {
            for (b, a) in before.iter().zip(after) {
                assert!(b == a || (*b == Missing && *a == Negative));
            }
        }
        assert!(report.achieved_tnr.values().all(|&t| t >= 0.9));
        assert!(report.converted["a"] > 0);
    }

    proptest::proptest! {
        #[test]
        fn tnr_threshold_meets_target(
            scores in proptest::collection::vec(0.0f64..1.0, 1..80),
            target in 0.01f64..=1.0,
        ) {
            let neg = vec![true; scores.len()];
            let t = tnr_threshold(&scores, &neg, target).unwrap();
            proptest::prop_assert!(achieved_tnr(&scores, &neg, t).unwrap() >= target);
        }
    }
}
