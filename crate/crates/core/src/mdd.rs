//! Mental disease detection from reweighted symptom-feature sequences.
//!
//! Each post becomes an S-dimensional vector
//! `f_symp = p_rel * w_status * w_subj`, where `p_rel` is the per-symptom
//! relevance (max over the post's sentences), `w_status = 1 - mean p_unc`
//! and `w_subj` is 0.9 when the poster talks about themselves at least as
//! much as about others, else 0.1. Per-disease binary detectors then run
//! over the sequence of post vectors.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::classifier::linear::{sigmoid, soft_bce_logit};
use crate::classifier::metrics::Confusion;
use crate::classifier::{RelevanceArtifact, StatusArtifact};
use crate::corpus::{clean_text, split_text};
use crate::{Error, Result};

pub const MAX_POSTS: usize = 256;
pub const SELF_WEIGHT: f64 = 0.9;
pub const OTHER_WEIGHT: f64 = 0.1;

pub const FIRST_PERSON: [&str; 10] = ["i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves"];
pub const OTHER_PERSON: [&str; 13] = [
    "he", "she", "they", "him", "her", "them", "his", "hers", "their", "theirs", "himself", "herself", "themselves",
];

/// Pronoun counting with optional extra patterns (names, mentions) that
/// count as references to other people.
#[derive(Debug, Clone, Default)]
pub struct SubjectRule {
    other_patterns: Vec<Regex>,
}

impl SubjectRule {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self> {
        let other_patterns = patterns
            .iter()
            .map(|p| Regex::new(&format!("(?i){}", p.as_ref())).map_err(|e| Error::parse("mention pattern", e)))
            .collect::<Result<_>>()?;
        Ok(Self { other_patterns })
    }

    /// (first-person count, other-person count)
    pub fn counts(&self, text: &str) -> (usize, usize) {
        let lower = text.to_lowercase();
        let (mut first, mut other) = (0, 0);
        for token in lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            if FIRST_PERSON.contains(&token) {
                first += 1;
            } else if OTHER_PERSON.contains(&token) {
                other += 1;
            }
        }
        other += self.other_patterns.iter().map(|re| re.find_iter(text).count()).sum::<usize>();
        (first, other)
    }

    pub fn weight(&self, text: &str) -> f64 {
        let (first, other) = self.counts(text);
        if first >= other {
            SELF_WEIGHT
        } else {
            OTHER_WEIGHT
        }
    }
}

pub fn subject_weight(text: &str) -> f64 {
    SubjectRule::default().weight(text)
}

/// Componentwise `p_rel * w_status * w_subj`.
pub fn reweight(p_rel: &[f64], w_status: f64, w_subj: f64) -> Result<Vec<f64>> {
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    if !unit(w_status) || !unit(w_subj) || !p_rel.iter().all(|&p| unit(p)) {
        return Err(Error::InvalidArgument("reweighting inputs must lie in [0, 1]".into()));
    }
    Ok(p_rel.iter().map(|p| p * w_status * w_subj).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPost {
    pub created_utc: i64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserHistory {
    pub user_id: String,
    #[serde(default)]
    pub label: BTreeMap<String, bool>,
    pub posts: Vec<UserPost>,
}

impl UserHistory {
    /// Sorts posts by time (stable) and keeps the earliest [`MAX_POSTS`].
    pub fn normalize(&mut self) {
        self.posts.sort_by_key(|p| p.created_utc);
        self.posts.truncate(MAX_POSTS);
    }

    pub fn has(&self, disease: &str) -> bool {
        self.label.get(disease).copied().unwrap_or(false)
    }

    pub fn is_control(&self) -> bool {
        !self.label.values().any(|&v| v)
    }
}

pub fn read_users(reader: impl BufRead) -> Result<Vec<UserHistory>> {
    let mut users = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse("users", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut user: UserHistory =
            serde_json::from_str(&line).map_err(|e| Error::parse("users", format!("line {}: {e}", n + 1)))?;
        if !seen.insert(user.user_id.clone()) {
            return Err(Error::Validation(format!("duplicate user id `{}`", user.user_id)));
        }
        user.normalize();
        users.push(user);
    }
    Ok(users)
}

pub fn load_users(path: impl AsRef<Path>) -> Result<Vec<UserHistory>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_users(std::io::BufReader::new(file))
}

pub fn users_to_ndjson(users: &[UserHistory]) -> String {
    users
        .iter()
        .map(|u| serde_json::to_string(u).expect("user serialises") + "\n")
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostFeatures {
    pub p_rel: Vec<f64>,
    pub w_status: f64,
    pub w_subj: f64,
    pub f_symp: Vec<f64>,
}

/// Features of one post from its sentence scores `(p_rel, p_unc)`. A post
/// without sentences has zero relevance and full status weight.
pub fn post_features(
    sentences: &[(Vec<f64>, f64)],
    n_symptoms: usize,
    w_subj: f64,
    reweighting: bool,
) -> Result<PostFeatures> {
    let mut p_rel = vec![0.0; n_symptoms];
    for (scores, _) in sentences {
        if scores.len() != n_symptoms {
            return Err(Error::DimensionMismatch {
                id: "sentence scores".into(),
                expected: n_symptoms,
                found: scores.len(),
            });
        }
        for (acc, &s) in p_rel.iter_mut().zip(scores) {
            *acc = f64::max(*acc, s);
        }
    }
    let w_status = if sentences.is_empty() {
        1.0
    } else {
        1.0 - sentences.iter().map(|(_, u)| u).sum::<f64>() / sentences.len() as f64
    };
    let f_symp = if reweighting {
        reweight(&p_rel, w_status, w_subj)?
    } else {
        p_rel.clone()
    };
    Ok(PostFeatures {
        p_rel,
        w_status,
        w_subj,
        f_symp,
    })
}

/// Per-post features for a (normalised) user history.
pub fn extract_features(
    user: &UserHistory,
    relevance: &RelevanceArtifact,
    status: &StatusArtifact,
    subject: &SubjectRule,
    reweighting: bool,
) -> Result<Vec<PostFeatures>> {
    let n_symptoms = relevance.model.symptoms.len();
    user.posts
        .iter()
        .take(MAX_POSTS)
        .map(|post| {
            let text = clean_text(&post.text);
            let sentences: Vec<(Vec<f64>, f64)> = split_text(&text)
                .iter()
                .map(|s| (relevance.score(s), status.score(s)))
                .collect();
            post_features(&sentences, n_symptoms, subject.weight(&text), reweighting)
        })
        .collect()
}

/// Feature extraction for many users, in parallel, keyed by user id.
pub fn extract_all(
    users: &[UserHistory],
    relevance: &RelevanceArtifact,
    status: &StatusArtifact,
    subject: &SubjectRule,
    reweighting: bool,
) -> Result<BTreeMap<String, Vec<PostFeatures>>> {
    use rayon::prelude::*;
    let rows: Vec<Result<(String, Vec<PostFeatures>)>> = users
        .par_iter()
        .map(|u| Ok((u.user_id.clone(), extract_features(u, relevance, status, subject, reweighting)?)))
        .collect();
    rows.into_iter().collect()
}

/// The `f_symp` sequence of a user.
pub fn sequence(features: &[PostFeatures]) -> Vec<Vec<f64>> {
    features.iter().map(|f| f.f_symp.clone()).collect()
}

/// Positives are users labelled with `disease`; negatives are controls with no
/// positive label at all. Users with only other diseases are left out.
pub fn binary_task<'a>(users: &'a [UserHistory], disease: &str) -> Vec<(&'a UserHistory, bool)> {
    users
        .iter()
        .filter_map(|u| {
            if u.has(disease) {
                Some((u, true))
            } else if u.is_control() {
                Some((u, false))
            } else {
                None
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Models

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MddVariant {
    Conv,
    Meanpool,
}

impl MddVariant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "conv" => Ok(MddVariant::Conv),
            "meanpool" => Ok(MddVariant::Meanpool),
            _ => Err(Error::InvalidArgument(format!("unknown MDD variant {s:?}"))),
        }
    }
}

/// One convolution layer with several kernel sizes, max-over-time pooling and
/// a logistic output. Parameters live in one flat vector laid out per kernel
/// as `[filters (C x k x S), biases (C)]`, then `[output weights (K*C), output bias]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvAggregator {
    pub kernels: Vec<usize>,
    pub channels: usize,
    pub in_dim: usize,
    pub params: Vec<f64>,
}

struct ConvForward {
    pooled: Vec<f64>,
    argmax: Vec<usize>,
    z: f64,
}

impl ConvAggregator {
    pub fn new(kernels: &[usize], channels: usize, in_dim: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if kernels.is_empty() || kernels.contains(&0) || channels == 0 || in_dim == 0 {
            return Err(Error::InvalidArgument("conv aggregator needs kernels, channels and inputs".into()));
        }
        let mut m = Self {
            kernels: kernels.to_vec(),
            channels,
            in_dim,
            params: Vec::new(),
        };
        let total = m.out_bias_offset() + 1;
        m.params = vec![0.0; total];
        for (g, &k) in kernels.iter().enumerate() {
            let a = 1.0 / ((k * in_dim) as f64).sqrt();
            let off = m.filter_offset(g);
            for p in &mut m.params[off..off + channels * k * in_dim] {
                *p = rng.random_range(-a..a);
            }
        }
        let a = 1.0 / ((kernels.len() * channels) as f64).sqrt();
        let off = m.out_offset();
        for p in &mut m.params[off..off + kernels.len() * channels] {
            *p = rng.random_range(-a..a);
        }
        Ok(m)
    }

    fn block(&self, g: usize) -> usize {
        self.channels * (self.kernels[g] * self.in_dim + 1)
    }

    fn filter_offset(&self, g: usize) -> usize {
        (0..g).map(|h| self.block(h)).sum()
    }

    fn bias_offset(&self, g: usize) -> usize {
        self.filter_offset(g) + self.channels * self.kernels[g] * self.in_dim
    }

    fn out_offset(&self) -> usize {
        (0..self.kernels.len()).map(|g| self.block(g)).sum()
    }

    fn out_bias_offset(&self) -> usize {
        self.out_offset() + self.kernels.len() * self.channels
    }

    fn max_kernel(&self) -> usize {
        self.kernels.iter().copied().max().unwrap_or(1)
    }

    fn check(&self, seq: &[Vec<f64>]) -> Result<()> {
        if seq.is_empty() {
            return Err(Error::InvalidArgument("empty posting sequence".into()));
        }
        if let Some(row) = seq.iter().find(|r| r.len() != self.in_dim) {
            return Err(Error::DimensionMismatch {
                id: "post features".into(),
                expected: self.in_dim,
                found: row.len(),
            });
        }
        Ok(())
    }

    fn forward(&self, seq: &[Vec<f64>]) -> ConvForward {
        let len = seq.len().max(self.max_kernel());
        let s = self.in_dim;
        let c = self.channels;
        let mut pooled = Vec::with_capacity(self.kernels.len() * c);
        let mut argmax = Vec::with_capacity(self.kernels.len() * c);
        for (g, &k) in self.kernels.iter().enumerate() {
            let f_off = self.filter_offset(g);
            let b_off = self.bias_offset(g);
            for ch in 0..c {
                let w = &self.params[f_off + ch * k * s..f_off + (ch + 1) * k * s];
                let mut best = f64::NEG_INFINITY;
                let mut best_t = 0;
                for t in 0..=len - k {
                    let mut h = self.params[b_off + ch];
                    for d in 0..k.min(seq.len().saturating_sub(t)) {
                        let x = &seq[t + d];
                        h += w[d * s..(d + 1) * s].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                    }
                    if h > best {
                        best = h;
                        best_t = t;
                    }
                }
                pooled.push(best);
                argmax.push(best_t);
            }
        }
        let o = self.out_offset();
        let z = pooled
            .iter()
            .zip(&self.params[o..o + pooled.len()])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            + self.params[self.out_bias_offset()];
        ConvForward { pooled, argmax, z }
    }

    pub fn predict(&self, seq: &[Vec<f64>]) -> Result<f64> {
        self.check(seq)?;
        Ok(sigmoid(self.forward(seq).z))
    }

    /// Cross-entropy of one example; adds `scale * dL/dparams` into `grad`.
    pub fn loss_grad(&self, seq: &[Vec<f64>], y: f64, scale: f64, grad: &mut [f64]) -> f64 {
        let fw = self.forward(seq);
        let dz = (sigmoid(fw.z) - y) * scale;
        let o = self.out_offset();
        let s = self.in_dim;
        let c = self.channels;
        for (i, &m) in fw.pooled.iter().enumerate() {
            grad[o + i] += dz * m;
        }
        grad[self.out_bias_offset()] += dz;
        for (g, &k) in self.kernels.iter().enumerate() {
            let f_off = self.filter_offset(g);
            let b_off = self.bias_offset(g);
            for ch in 0..c {
                let idx = g * c + ch;
                let dm = dz * self.params[o + idx];
                let t = fw.argmax[idx];
                grad[b_off + ch] += dm;
                for d in 0..k.min(seq.len().saturating_sub(t)) {
                    let base = f_off + ch * k * s + d * s;
                    for (gp, x) in grad[base..base + s].iter_mut().zip(&seq[t + d]) {
                        *gp += dm * x;
                    }
                }
            }
        }
        soft_bce_logit(fw.z, y)
    }

    /// Weight entries subject to L2 (everything but biases).
    fn decayed(&self) -> Vec<bool> {
        let mut mask = vec![false; self.params.len()];
        for g in 0..self.kernels.len() {
            let off = self.filter_offset(g);
            mask[off..self.bias_offset(g)].iter_mut().for_each(|m| *m = true);
        }
        mask[self.out_offset()..self.out_bias_offset()].iter_mut().for_each(|m| *m = true);
        mask
    }
}

/// Logistic regression on the mean post vector. Parameters: `[w (S), b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanPoolLr {
    pub in_dim: usize,
    pub params: Vec<f64>,
}

impl MeanPoolLr {
    pub fn new(in_dim: usize) -> Self {
        Self {
            in_dim,
            params: vec![0.0; in_dim + 1],
        }
    }

    fn check(&self, seq: &[Vec<f64>]) -> Result<()> {
        if seq.is_empty() {
            return Err(Error::InvalidArgument("empty posting sequence".into()));
        }
        if let Some(row) = seq.iter().find(|r| r.len() != self.in_dim) {
            return Err(Error::DimensionMismatch {
                id: "post features".into(),
                expected: self.in_dim,
                found: row.len(),
            });
        }
        Ok(())
    }

    fn mean(&self, seq: &[Vec<f64>]) -> Vec<f64> {
        let mut m = vec![0.0; self.in_dim];
        for row in seq {
            for (a, b) in m.iter_mut().zip(row) {
                *a += b;
            }
        }
        m.iter_mut().for_each(|a| *a /= seq.len() as f64);
        m
    }

    fn logit(&self, mean: &[f64]) -> f64 {
        mean.iter().zip(&self.params).map(|(a, b)| a * b).sum::<f64>() + self.params[self.in_dim]
    }

    pub fn predict(&self, seq: &[Vec<f64>]) -> Result<f64> {
        self.check(seq)?;
        Ok(sigmoid(self.logit(&self.mean(seq))))
    }

    pub fn loss_grad(&self, seq: &[Vec<f64>], y: f64, scale: f64, grad: &mut [f64]) -> f64 {
        let m = self.mean(seq);
        let z = self.logit(&m);
        let dz = (sigmoid(z) - y) * scale;
        for (g, x) in grad.iter_mut().zip(&m) {
            *g += dz * x;
        }
        grad[self.in_dim] += dz;
        soft_bce_logit(z, y)
    }

    fn decayed(&self) -> Vec<bool> {
        let mut mask = vec![true; self.in_dim + 1];
        mask[self.in_dim] = false;
        mask
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MddNet {
    Conv(ConvAggregator),
    Meanpool(MeanPoolLr),
}

impl MddNet {
    pub fn predict(&self, seq: &[Vec<f64>]) -> Result<f64> {
        match self {
            MddNet::Conv(m) => m.predict(seq),
            MddNet::Meanpool(m) => m.predict(seq),
        }
    }

    pub fn variant(&self) -> MddVariant {
        match self {
            MddNet::Conv(_) => MddVariant::Conv,
            MddNet::Meanpool(_) => MddVariant::Meanpool,
        }
    }

    fn params(&self) -> &[f64] {
        match self {
            MddNet::Conv(m) => &m.params,
            MddNet::Meanpool(m) => &m.params,
        }
    }

    fn params_mut(&mut self) -> &mut Vec<f64> {
        match self {
            MddNet::Conv(m) => &mut m.params,
            MddNet::Meanpool(m) => &mut m.params,
        }
    }

    fn check(&self, seq: &[Vec<f64>]) -> Result<()> {
        match self {
            MddNet::Conv(m) => m.check(seq),
            MddNet::Meanpool(m) => m.check(seq),
        }
    }

    fn loss_grad(&self, seq: &[Vec<f64>], y: f64, scale: f64, grad: &mut [f64]) -> f64 {
        match self {
            MddNet::Conv(m) => m.loss_grad(seq, y, scale, grad),
            MddNet::Meanpool(m) => m.loss_grad(seq, y, scale, grad),
        }
    }

    fn decayed(&self) -> Vec<bool> {
        match self {
            MddNet::Conv(m) => m.decayed(),
            MddNet::Meanpool(m) => m.decayed(),
        }
    }

    /// Mean cross-entropy over `batch` plus `l2 / 2 * |w|^2`, with gradient.
    pub fn batch_objective(&self, data: &[(Vec<Vec<f64>>, bool)], batch: &[usize], l2: f64) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params().len()];
        let scale = 1.0 / batch.len().max(1) as f64;
        let mut loss = 0.0;
        for &i in batch {
            let (seq, y) = &data[i];
            loss += scale * self.loss_grad(seq, f64::from(u8::from(*y)), scale, &mut grad);
        }
        if l2 > 0.0 {
            for ((g, w), d) in grad.iter_mut().zip(self.params()).zip(self.decayed()) {
                if d {
                    loss += 0.5 * l2 * w * w;
                    *g += l2 * w;
                }
            }
        }
        (loss, grad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MddModel {
    pub disease: String,
    pub seed: u64,
    pub threshold: f64,
    pub net: MddNet,
}

impl MddModel {
    pub fn predict(&self, seq: &[Vec<f64>]) -> Result<f64> {
        self.net.predict(seq)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MddConfig {
    pub kernels: Vec<usize>,
    pub channels: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub seed: u64,
    pub momentum: f64,
    pub l2: f64,
    pub threshold: f64,
}

impl Default for MddConfig {
    fn default() -> Self {
        Self {
            kernels: vec![3, 5, 7],
            channels: 16,
            learning_rate: 0.05,
            epochs: 40,
            batch_size: 16,
            patience: 4,
            seed: 0,
            momentum: 0.9,
            l2: 1e-4,
            threshold: 0.5,
        }
    }
}

impl MddConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if self.patience < 1 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("patience and batch size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) || self.l2 < 0.0 {
            return Err(Error::InvalidArgument("momentum must be in [0, 1) and l2 non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MddTrainReport {
    pub disease: String,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub validation_f1: Option<f64>,
}

fn f1_of(net: &MddNet, data: &[(Vec<Vec<f64>>, bool)], threshold: f64) -> Result<(f64, f64)> {
    let mut predicted = Vec::with_capacity(data.len());
    let mut loss = 0.0;
    for (seq, y) in data {
        let p = net.predict(seq)?;
        predicted.push(p >= threshold);
        let p = p.clamp(1e-12, 1.0 - 1e-12);
        loss -= if *y { p.ln() } else { (1.0 - p).ln() };
    }
    let f1 = Confusion::from_predictions(predicted, data.iter().map(|d| d.1)).f1();
    Ok((f1, loss / data.len().max(1) as f64))
}

/// Trains one binary detector. Early stopping keeps the epoch with the best
/// validation F1 (validation loss breaks ties).
pub fn train_mdd(
    train: &[(Vec<Vec<f64>>, bool)],
    validation: &[(Vec<Vec<f64>>, bool)],
    disease: &str,
    variant: MddVariant,
    config: &MddConfig,
) -> Result<(MddModel, MddTrainReport)> {
    config.validate()?;
    let n_pos = train.iter().filter(|d| d.1).count();
    if n_pos == 0 || n_pos == train.len() {
        return Err(Error::Insufficient(format!(
            "{disease}: training needs both diagnosed and control users"
        )));
    }
    let in_dim = train[0].0.first().map_or(0, Vec::len);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = match variant {
        MddVariant::Conv => MddNet::Conv(ConvAggregator::new(&config.kernels, config.channels, in_dim, &mut rng)?),
        MddVariant::Meanpool => MddNet::Meanpool(MeanPoolLr::new(in_dim)),
    };
    for (seq, _) in train.iter().chain(validation) {
        net.check(seq)?;
    }
    let mut velocity = vec![0.0; net.params().len()];
    let mut best: Option<((f64, f64), MddNet, usize)> = None;
    let mut stale = 0;
    let mut epochs_run = 0;
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 0..config.epochs {
        epochs_run = epoch + 1;
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let (loss, grad) = net.batch_objective(train, batch, config.l2);
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    stage: "mdd",
                    epoch,
                    loss,
                });
            }
            for ((p, v), g) in net.params_mut().iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                *v = config.momentum * *v + g;
                *p -= config.learning_rate * *v;
            }
        }
        if net.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence {
                stage: "mdd",
                epoch,
                loss: f64::NAN,
            });
        }
        if validation.is_empty() {
            continue;
        }
        let (f1, loss) = f1_of(&net, validation, config.threshold)?;
        let improved = match &best {
            None => true,
            Some(((bf, bl), _, _)) => f1 > *bf || (f1 == *bf && loss < *bl),
        };
        if improved {
            best = Some(((f1, loss), net.clone(), epoch + 1));
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    let (net, best_epoch, validation_f1) = match best {
        Some(((f1, _), net, e)) => (net, e, Some(f1)),
        None => (net, epochs_run, None),
    };
    Ok((
        MddModel {
            disease: disease.to_string(),
            seed: config.seed,
            threshold: config.threshold,
            net,
        },
        MddTrainReport {
            disease: disease.to_string(),
            epochs_run,
            best_epoch,
            validation_f1,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MddEval {
    pub per_disease_f1: BTreeMap<String, f64>,
    pub macro_f1: f64,
    pub excluded: Vec<String>,
}

/// Positive-class F1 per disease from `(probability, label)` pairs.
pub fn eval_predictions(per_disease: &BTreeMap<String, Vec<(f64, bool)>>, threshold: f64) -> Result<MddEval> {
    let mut per_disease_f1 = BTreeMap::new();
    let mut excluded = Vec::new();
    for (disease, rows) in per_disease {
        if !rows.iter().any(|r| r.1) {
            excluded.push(disease.clone());
            continue;
        }
        let c = Confusion::from_predictions(rows.iter().map(|r| r.0 >= threshold), rows.iter().map(|r| r.1));
        per_disease_f1.insert(disease.clone(), c.f1());
    }
    if per_disease_f1.is_empty() {
        return Err(Error::Insufficient("no disease has test positives".into()));
    }
    let macro_f1 = per_disease_f1.values().sum::<f64>() / per_disease_f1.len() as f64;
    Ok(MddEval {
        per_disease_f1,
        macro_f1,
        excluded,
    })
}

/// Evaluates each disease model on its binary test task.
pub fn eval_mdd(
    models: &BTreeMap<String, MddModel>,
    users: &[UserHistory],
    features: &BTreeMap<String, Vec<Vec<f64>>>,
) -> Result<MddEval> {
    let mut per_disease = BTreeMap::new();
    let mut threshold = 0.5;
    for (disease, model) in models {
        threshold = model.threshold;
        let mut rows = Vec::new();
        for (user, y) in binary_task(users, disease) {
            let seq = features
                .get(&user.user_id)
                .ok_or_else(|| Error::UnknownId {
                    kind: "user",
                    id: user.user_id.clone(),
                })?;
            rows.push((model.predict(seq)?, y));
        }
        per_disease.insert(disease.clone(), rows);
    }
    eval_predictions(&per_disease, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn subject_weight_examples() {
        assert_eq!(subject_weight("I feel sad"), 0.9);
        assert_eq!(subject_weight("She says he is anxious"), 0.1);
        assert_eq!(subject_weight("I told her I can't sleep"), 0.9);
        assert_eq!(subject_weight(""), 0.9);
        assert_eq!(subject_weight("HER... (him)!"), subject_weight("her him"));
        let rule = SubjectRule::new(&[r"\bu/\w+"]).unwrap();
        assert_eq!(rule.counts("u/alex told me"), (1, 1));
        assert_eq!(rule.weight("u/alex and u/sam told me"), 0.1);
    }

    #[test]
    fn reweight_examples() {
        let f = reweight(&[0.8, 0.5], 1.0, 0.9).unwrap();
        assert_abs_diff_eq!(f[0], 0.72, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], 0.45, epsilon = 1e-12);
        assert_eq!(reweight(&[0.3, 0.9], 0.0, 0.9).unwrap(), [0.0, 0.0]);
        assert_eq!(reweight(&[1.0], 1.0, 0.1).unwrap(), [0.1]);
        assert!(reweight(&[1.2], 1.0, 0.9).is_err());
    }

    #[test]
    fn post_level_pooling() {
        let single = post_features(&[(vec![0.3, 0.6], 0.0)], 2, 0.9, false).unwrap();
        assert_eq!(single.p_rel, [0.3, 0.6]);
        assert_eq!(single.f_symp, single.p_rel);
        let two = post_features(&[(vec![0.3, 0.1], 0.2), (vec![0.2, 0.5], 0.4)], 2, 0.9, true).unwrap();
        assert_eq!(two.p_rel, [0.3, 0.5]);
        assert_abs_diff_eq!(two.w_status, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(two.f_symp[1], 0.5 * 0.7 * 0.9, epsilon = 1e-12);
    }

    #[test]
    fn histories_sort_and_truncate() {
        let posts = (0..300)
            .rev()
            .map(|t| UserPost {
                created_utc: t,
                text: format!("post {t}"),
            })
            .collect();
        let line = serde_json::to_string(&UserHistory {
            user_id: "u".into(),
            label: BTreeMap::new(),
            posts,
        })
        .unwrap();
        let users = read_users(line.as_bytes()).unwrap();
        assert_eq!(users[0].posts.len(), MAX_POSTS);
        assert_eq!(users[0].posts[0].created_utc, 0);
        assert_eq!(users[0].posts[255].created_utc, 255);
    }

    fn random_seq(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..len).map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect()).collect()
    }

    #[test]
    fn conv_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for case in 0..20 {
            let net = MddNet::Conv(ConvAggregator::new(&[2, 3], 3, 4, &mut rng).unwrap());
            let data: Vec<(Vec<Vec<f64>>, bool)> = (0..3)
                .map(|i| (random_seq(&mut rng, 1 + (case + i) % 6, 4), i % 2 == 0))
                .collect();
            let batch = [0, 1, 2];
            let (_, grad) = net.batch_objective(&data, &batch, 0.01);
            let eps = 1e-6;
            for j in 0..net.params().len() {
                let bump = |d: f64| {
                    let mut n = net.clone();
                    n.params_mut()[j] += d;
                    n.batch_objective(&data, &batch, 0.01).0
                };
                let numeric = (bump(eps) - bump(-eps)) / (2.0 * eps);
                let denom = numeric.abs().max(grad[j].abs());
                if denom > 1e-7 {
                    assert!((numeric - grad[j]).abs() / denom <= 1e-4, "case {case} param {j}");
                }
            }
        }
    }

    fn planted(rng: &mut ChaCha8Rng, n: usize) -> Vec<(Vec<Vec<f64>>, bool)> {
        (0..n)
            .map(|i| {
                let y = i % 3 == 0;
                let len = rng.random_range(1..12);
                let seq = (0..len)
                    .map(|t| {
                        (0..4)
                            .map(|s| {
                                let base = rng.random_range(0.0..0.3);
                                if y && s < 2 && t % 2 == 0 {
                                    base + 0.6
                                } else {
                                    base
                                }
                            })
                            .collect()
                    })
                    .collect();
                (seq, y)
            })
            .collect()
    }

    #[test]
    fn planted_signal_is_recovered_by_both_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let train = planted(&mut rng, 120);
        let val = planted(&mut rng, 60);
        let cfg = MddConfig {
            channels: 4,
            ..MddConfig::default()
        };
        for variant in [MddVariant::Conv, MddVariant::Meanpool] {
            let cfg = MddConfig {
                learning_rate: if variant == MddVariant::Conv { 0.05 } else { 1.0 },
                ..cfg.clone()
            };
            let (model, report) = train_mdd(&train, &val, "d", variant, &cfg).unwrap();
            assert!(report.validation_f1.unwrap() >= 0.9, "{variant:?}: {report:?}");
            assert!(model.predict(&[vec![0.0; 4]]).is_ok(), "single post is padded");
        }
    }

    #[test]
    fn training_is_deterministic_and_rejects_one_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let train = planted(&mut rng, 30);
        let cfg = MddConfig {
            channels: 2,
            epochs: 3,
            ..MddConfig::default()
        };
        let a = train_mdd(&train, &train, "d", MddVariant::Conv, &cfg).unwrap();
        let b = train_mdd(&train, &train, "d", MddVariant::Conv, &cfg).unwrap();
        assert_eq!(a, b);
        let positives: Vec<_> = train.iter().filter(|d| d.1).cloned().collect();
        assert!(train_mdd(&positives, &[], "d", MddVariant::Conv, &cfg).is_err());
    }

    #[test]
    fn eval_counts() {
        let rows = vec![(0.9, true), (0.8, false), (0.1, true), (0.2, false)];
        let e = eval_predictions(&[("d".to_string(), rows)].into(), 0.5).unwrap();
        assert_eq!(e.per_disease_f1["d"], 0.5);
        let none = eval_predictions(&[("x".to_string(), vec![(0.9, false)])].into(), 0.5);
        assert!(none.is_err());
    }

    #[test]
    fn binary_task_excludes_other_diseases() {
        let user = |id: &str, labels: &[(&str, bool)]| UserHistory {
            user_id: id.into(),
            label: labels.iter().map(|(d, v)| (d.to_string(), *v)).collect(),
            posts: vec![],
        };
        let users = vec![
            user("a", &[("ocd", true)]),
            user("b", &[("ptsd", true)]),
            user("c", &[]),
            user("d", &[("ocd", false), ("ptsd", false)]),
        ];
        let task: Vec<(&str, bool)> = binary_task(&users, "ocd").iter().map(|(u, y)| (u.user_id.as_str(), *y)).collect();
        assert_eq!(task, [("a", true), ("c", false), ("d", false)]);
    }
}
