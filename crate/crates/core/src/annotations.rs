//! Multi-annotator labels: gold-label merging, agreement and annotator
//! quality scoring.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::kg::KnowledgeGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    True,
    Uncertain,
}

impl Status {
    fn code(self) -> &'static str {
        match self {
            Status::True => "T",
            Status::Uncertain => "U",
        }
    }
}

/// One annotator's judgement of one sentence. `relevance` covers exactly the
/// typical symptoms of the sentence's disease queue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub sentence_id: String,
    pub annotator_id: String,
    pub relevance: BTreeMap<String, bool>,
    pub status: Option<Status>,
}

impl AnnotationRecord {
    pub fn any_relevant(&self) -> bool {
        self.relevance.values().any(|&v| v)
    }

    /// Checks status presence against relevance and, when given, the key set
    /// against the disease's typical symptoms.
    pub fn validate(&self, typical: Option<&BTreeSet<String>>) -> Result<()> {
        if self.any_relevant() != self.status.is_some() {
            return Err(Error::Validation(format!(
                "record ({}, {}): status must be present exactly when some symptom is relevant",
                self.sentence_id, self.annotator_id
            )));
        }
        if let Some(typical) = typical {
            if let Some(extra) = self.relevance.keys().find(|k| !typical.contains(*k)) {
                return Err(Error::Validation(format!(
                    "record ({}, {}) labels non-typical symptom `{extra}`",
                    self.sentence_id, self.annotator_id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldLabel {
    pub sentence_id: String,
    pub relevant: BTreeSet<String>,
    /// Symptoms that were annotated; everything else is missing, not negative.
    pub observed: BTreeSet<String>,
    pub status_q: f64,
    /// Number of status votes `status_q` is a fraction of (0 when inapplicable).
    #[serde(default)]
    pub status_votes: usize,
    #[serde(default = "default_annotators")]
    pub n_annotators: usize,
}

fn default_annotators() -> usize {
    3
}

impl GoldLabel {
    pub fn status_applicable(&self) -> bool {
        self.status_votes > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceMerge {
    pub relevant: BTreeSet<String>,
    pub observed: BTreeSet<String>,
}

/// Any-positive merge: a symptom is relevant when at least one annotator
/// marked it.
pub fn merge_relevance(records: &[AnnotationRecord]) -> Result<RelevanceMerge> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("merge_relevance needs at least one record".into()))?;
    let observed: BTreeSet<String> = first.relevance.keys().cloned().collect();
    let mut relevant = BTreeSet::new();
    for r in records {
        let keys: BTreeSet<String> = r.relevance.keys().cloned().collect();
        if keys != observed {
            return Err(Error::Validation(format!(
                "annotators disagree on the observed symptom set for sentence `{}`",
                r.sentence_id
            )));
        }
        relevant.extend(r.relevance.iter().filter(|(_, &v)| v).map(|(k, _)| k.clone()));
    }
    Ok(RelevanceMerge { relevant, observed })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatusMerge {
    pub q: f64,
    pub votes: usize,
    pub applicable: bool,
}

/// Fraction of status-bearing records that say `Uncertain`. Sentences with no
/// status votes get `q = 0` and are flagged inapplicable.
pub fn merge_status(records: &[AnnotationRecord]) -> StatusMerge {
    let votes: Vec<Status> = records.iter().filter_map(|r| r.status).collect();
    if votes.is_empty() {
        return StatusMerge {
            q: 0.0,
            votes: 0,
            applicable: false,
        };
    }
    let uncertain = votes.iter().filter(|&&s| s == Status::Uncertain).count();
    StatusMerge {
        q: uncertain as f64 / votes.len() as f64,
        votes: votes.len(),
        applicable: true,
    }
}

/// Collapses symptom-level statuses: `Uncertain` when any relevant symptom is
/// uncertain.
pub fn sentence_status_from_symptom_status(per_symptom: &BTreeMap<String, Status>) -> Result<Status> {
    if per_symptom.is_empty() {
        return Err(Error::InvalidArgument("no symptom statuses to merge".into()));
    }
    Ok(if per_symptom.values().any(|&s| s == Status::Uncertain) {
        Status::Uncertain
    } else {
        Status::True
    })
}

pub fn merge_sentence(records: &[AnnotationRecord]) -> Result<GoldLabel> {
    let rel = merge_relevance(records)?;
    let status = merge_status(records);
    Ok(GoldLabel {
        sentence_id: records[0].sentence_id.clone(),
        relevant: rel.relevant,
        observed: rel.observed,
        status_q: status.q,
        status_votes: status.votes,
        n_annotators: records.len(),
    })
}

/// Groups records by sentence (sorted by sentence id) and merges each group.
pub fn merge_all(records: &[AnnotationRecord]) -> Result<Vec<GoldLabel>> {
    group_by_sentence(records)
        .values()
        .map(|group| merge_sentence(group))
        .collect()
}

pub fn group_by_sentence(records: &[AnnotationRecord]) -> BTreeMap<String, Vec<AnnotationRecord>> {
    let mut groups: BTreeMap<String, Vec<AnnotationRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.sentence_id.clone()).or_default().push(r.clone());
    }
    groups
}

// ---------------------------------------------------------------------------
// Annotation / gold files

fn parse_status(field: &str) -> Result<Option<Status>> {
    match field.trim() {
        "T" => Ok(Some(Status::True)),
        "U" => Ok(Some(Status::Uncertain)),
        "" | "-" | "\u{2205}" => Ok(None),
        other => Err(Error::parse("annotations", format!("bad status `{other}`"))),
    }
}

/// Parses the row-per-symptom TSV `(sentence_id, annotator_id, symptom_id,
/// relevant, status)`. Symptom-level statuses are collapsed to sentence level
/// over the annotator's relevant symptoms.
pub fn parse_annotation_tsv(text: &str) -> Result<Vec<AnnotationRecord>> {
    type Key = (String, String);
    let mut rel: BTreeMap<Key, BTreeMap<String, bool>> = BTreeMap::new();
    let mut stat: BTreeMap<Key, BTreeMap<String, Status>> = BTreeMap::new();
    let mut order: Vec<Key> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 4 {
            return Err(Error::parse(
                "annotations",
                format!("line {} has {} columns, expected 5", lineno + 1, cols.len()),
            ));
        }
        let key = (cols[0].to_string(), cols[1].to_string());
        let relevant = match cols[3].trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::parse(
                    "annotations",
                    format!("line {}: relevance must be 0 or 1, got `{other}`", lineno + 1),
                ))
            }
        };
        if !rel.contains_key(&key) {
            order.push(key.clone());
        }
        rel.entry(key.clone()).or_default().insert(cols[2].to_string(), relevant);
        if relevant {
            if let Some(s) = parse_status(cols.get(4).copied().unwrap_or(""))? {
                stat.entry(key).or_default().insert(cols[2].to_string(), s);
            }
        }
    }
    order
        .into_iter()
        .map(|key| {
            let relevance = rel.remove(&key).unwrap_or_default();
            let status = match stat.get(&key) {
                Some(m) if !m.is_empty() => Some(sentence_status_from_symptom_status(m)?),
                _ => None,
            };
            let record = AnnotationRecord {
                sentence_id: key.0,
                annotator_id: key.1,
                relevance,
                status,
            };
            record.validate(None)?;
            Ok(record)
        })
        .collect()
}

pub fn annotation_tsv(records: &[AnnotationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        for (sym, &rel) in &r.relevance {
            let status = match (rel, r.status) {
                (true, Some(s)) => s.code(),
                _ => "",
            };
            writeln!(out, "{}\t{}\t{}\t{}\t{}", r.sentence_id, r.annotator_id, sym, u8::from(rel), status).unwrap();
        }
    }
    out
}

pub fn gold_to_ndjson(gold: &[GoldLabel]) -> String {
    gold.iter()
        .map(|g| serde_json::to_string(g).expect("gold label serialises") + "\n")
        .collect()
}

pub fn gold_from_ndjson(text: &str) -> Result<Vec<GoldLabel>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::parse("gold labels", e)))
        .collect()
}

/// Checks gold labels against the graph: known symptoms, relevant within
/// observed.
pub fn validate_gold(gold: &GoldLabel, kg: &KnowledgeGraph) -> Result<()> {
    for s in gold.observed.iter().chain(&gold.relevant) {
        kg.symptom(s)?;
    }
    if !gold.relevant.is_subset(&gold.observed) {
        return Err(Error::Validation(format!(
            "gold label `{}` has relevant symptoms outside its observed set",
            gold.sentence_id
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Agreement

/// Fleiss's kappa over an items x categories count matrix with `n` raters per
/// item. Returns `Ok(None)` when chance agreement is 1 (a single category used
/// throughout), where kappa is undefined.
pub fn fleiss_kappa(matrix: &[Vec<u32>], n: u32) -> Result<Option<f64>> {
    if matrix.len() < 2 {
        return Err(Error::InvalidArgument("Fleiss's kappa needs at least two items".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("Fleiss's kappa needs at least two raters".into()));
    }
    let k = matrix[0].len();
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Validation(format!("row {i} has {} categories, expected {k}", row.len())));
        }
        let sum: u32 = row.iter().sum();
        if sum != n {
            return Err(Error::Validation(format!("row {i} sums to {sum}, expected {n}")));
        }
    }
    let items = matrix.len() as f64;
    let nf = f64::from(n);
    let mut col = vec![0u64; k];
    let mut p_bar = 0.0;
    for row in matrix {
        let sq: u64 = row.iter().map(|&c| u64::from(c) * u64::from(c)).sum();
        p_bar += (sq as f64 - nf) / (nf * (nf - 1.0));
        for (j, &c) in row.iter().enumerate() {
            col[j] += u64::from(c);
        }
    }
    p_bar /= items;
    let total = items * nf;
    let p_e: f64 = col.iter().map(|&c| (c as f64 / total).powi(2)).sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(None);
    }
    if p_bar == 1.0 {
        return Ok(Some(1.0));
    }
    Ok(Some((p_bar - p_e) / (1.0 - p_e)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// Relevance kappa per symptom (None when undefined or too few items).
    pub relevance: BTreeMap<String, Option<f64>>,
    pub mean_relevance: Option<f64>,
    pub status: Option<f64>,
    pub uncertain_fraction: f64,
}

/// Relevance kappa per symptom over sentences annotated by exactly `n` raters,
/// plus status kappa over sentences where all `n` raters gave a status.
pub fn agreement(records: &[AnnotationRecord], n: usize) -> Result<AgreementReport> {
    let groups = group_by_sentence(records);
    let mut per_symptom: BTreeMap<String, Vec<Vec<u32>>> = BTreeMap::new();
    let mut status_rows = Vec::new();
    let (mut unc, mut votes) = (0usize, 0usize);
    for group in groups.values() {
        for r in group {
            if let Some(s) = r.status {
                votes += 1;
                unc += usize::from(s == Status::Uncertain);
            }
        }
        if group.len() != n {
            continue;
        }
        let rel = merge_relevance(group)?;
        for sym in &rel.observed {
            let yes = group.iter().filter(|r| r.relevance[sym]).count() as u32;
            per_symptom.entry(sym.clone()).or_default().push(vec![yes, n as u32 - yes]);
        }
        if group.iter().all(|r| r.status.is_some()) {
            let u = group.iter().filter(|r| r.status == Some(Status::Uncertain)).count() as u32;
            status_rows.push(vec![n as u32 - u, u]);
        }
    }
    let relevance: BTreeMap<String, Option<f64>> = per_symptom
        .into_iter()
        .map(|(s, rows)| {
            let k = if rows.len() >= 2 { fleiss_kappa(&rows, n as u32)? } else { None };
            Ok((s, k))
        })
        .collect::<Result<_>>()?;
    let defined: Vec<f64> = relevance.values().flatten().copied().collect();
    let mean_relevance = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    let status = if status_rows.len() >= 2 {
        fleiss_kappa(&status_rows, n as u32)?
    } else {
        None
    };
    Ok(AgreementReport {
        relevance,
        mean_relevance,
        status,
        uncertain_fraction: if votes == 0 { 0.0 } else { unc as f64 / votes as f64 },
    })
}

// ---------------------------------------------------------------------------
// Annotator quality

pub const SCREENING_PASS: f64 = 75.0;
pub const BATCH_REJECT: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    /// F-beta scaled to 0..=100.
    pub f_beta: f64,
    pub beta: f64,
}

impl QualityScore {
    /// Screening tests require a score above 75.
    pub fn qualifies(&self) -> bool {
        self.f_beta >= SCREENING_PASS
    }

    /// Sampling inspection rejects the whole batch below 60.
    pub fn rejects_batch(&self) -> bool {
        self.f_beta < BATCH_REJECT
    }
}

/// Micro F-beta (x100) of `candidate` marks against `reference` marks over the
/// same `(sentence, symptom)` key space.
pub fn quality_score<K: Ord + std::fmt::Debug>(
    candidate: &BTreeMap<K, bool>,
    reference: &BTreeMap<K, bool>,
    beta: f64,
) -> Result<QualityScore> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    if candidate.len() != reference.len() || candidate.keys().zip(reference.keys()).any(|(a, b)| a != b) {
        return Err(Error::Validation("candidate and reference cover different keys".into()));
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (c, r) in candidate.values().zip(reference.values()) {
        match (c, r) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    let b2 = beta * beta;
    let f = if p == 0.0 && r == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / (b2 * p + r)
    };
    Ok(QualityScore { f_beta: 100.0 * f, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rec(annotator: &str, marks: &[(&str, bool)], status: Option<Status>) -> AnnotationRecord {
        AnnotationRecord {
            sentence_id: "s1".into(),
            annotator_id: annotator.into(),
            relevance: marks.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            status,
        }
    }

    use Status::{True as T, Uncertain as U};

    #[test]
    fn any_positive_merge() {
        let r = merge_relevance(&[
            rec("a", &[("s", true)], Some(T)),
            rec("b", &[("s", false)], None),
            rec("c", &[("s", false)], None),
        ])
        .unwrap();
        assert!(r.relevant.contains("s"));

        let none = merge_relevance(&[rec("a", &[("s", false), ("t", false)], None)]).unwrap();
        assert!(none.relevant.is_empty());
        assert_eq!(none.observed.len(), 2);

        let both = merge_relevance(&[
            rec("a", &[("s", true), ("t", false)], Some(T)),
            rec("b", &[("s", false), ("t", true)], Some(T)),
        ])
        .unwrap();
        assert_eq!(both.relevant.len(), 2);

        assert!(merge_relevance(&[rec("a", &[("s", true)], Some(T)), rec("b", &[("t", true)], Some(T))]).is_err());
        assert!(merge_relevance(&[]).is_err());
    }

    #[test]
    fn status_fractions() {
        let recs = |ss: &[Status]| -> Vec<AnnotationRecord> {
            ss.iter().map(|&s| rec("x", &[("s", true)], Some(s))).collect()
        };
        assert_abs_diff_eq!(merge_status(&recs(&[T, T, U])).q, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(merge_status(&recs(&[T, T, T])).q, 0.0);
        assert_eq!(merge_status(&recs(&[U, U, U])).q, 1.0);
        let none = merge_status(&[rec("a", &[("s", false)], None)]);
        assert!(!none.applicable && none.q == 0.0);
    }

    #[test]
    fn sentence_level_status() {
        let m = |xs: &[(&str, Status)]| -> BTreeMap<String, Status> {
            xs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
        };
        assert_eq!(sentence_status_from_symptom_status(&m(&[("a", T), ("b", U)])).unwrap(), U);
        assert_eq!(sentence_status_from_symptom_status(&m(&[("a", T)])).unwrap(), T);
        assert_eq!(sentence_status_from_symptom_status(&m(&[("a", U), ("b", U)])).unwrap(), U);
        assert!(sentence_status_from_symptom_status(&BTreeMap::new()).is_err());
    }

    #[test]
    fn record_validation() {
        assert!(rec("a", &[("s", true)], None).validate(None).is_err());
        assert!(rec("a", &[("s", false)], Some(T)).validate(None).is_err());
        let typical: BTreeSet<String> = ["t".to_string()].into();
        assert!(rec("a", &[("s", false)], None).validate(Some(&typical)).is_err());
    }

    #[test]
    fn tsv_round_trip_and_symptom_level_collapse() {
        let text = "s1\ta1\tx\t1\tT\ns1\ta1\ty\t1\tU\ns1\ta1\tz\t0\t\ns1\ta2\tx\t0\t\ns1\ta2\ty\t0\t\ns1\ta2\tz\t0\t\n";
        let recs = parse_annotation_tsv(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].status, Some(U));
        assert_eq!(recs[1].status, None);
        assert_eq!(parse_annotation_tsv(&annotation_tsv(&recs)).unwrap(), recs);
        assert!(parse_annotation_tsv("s\ta\tx\t2\t\n").is_err());
        assert!(parse_annotation_tsv("s\ta\tx\t1\t\n").is_err());
    }

    /// Direct textbook evaluation, written independently of `fleiss_kappa`.
    fn kappa_oracle(m: &[Vec<u32>]) -> f64 {
        let n_items = m.len() as f64;
        let n: f64 = m[0].iter().map(|&x| f64::from(x)).sum();
        let k = m[0].len();
        let p_j: Vec<f64> = (0..k)
            .map(|j| m.iter().map(|r| f64::from(r[j])).sum::<f64>() / (n_items * n))
            .collect();
        let p_i: Vec<f64> = m
            .iter()
            .map(|r| {
                let s: f64 = r.iter().map(|&x| f64::from(x) * (f64::from(x) - 1.0)).sum();
                s / (n * (n - 1.0))
            })
            .collect();
        let p_bar = p_i.iter().sum::<f64>() / n_items;
        let p_e: f64 = p_j.iter().map(|p| p * p).sum();
        (p_bar - p_e) / (1.0 - p_e)
    }

    #[test]
    fn kappa_cases() {
        let perfect = vec![vec![3, 0], vec![0, 3], vec![3, 0]];
        assert_eq!(fleiss_kappa(&perfect, 3).unwrap(), Some(1.0));

        let split = vec![vec![1, 1], vec![1, 1], vec![2, 0], vec![1, 1]];
        let k = fleiss_kappa(&split, 2).unwrap().unwrap();
        assert_abs_diff_eq!(k, kappa_oracle(&split), epsilon = 1e-12);
        // P_i = (0, 0, 1, 0), P-bar = 1/4; p = (5/8, 3/8), P_e = 34/64
        assert_abs_diff_eq!(k, (0.25 - 34.0 / 64.0) / (1.0 - 34.0 / 64.0), epsilon = 1e-12);

        assert_eq!(fleiss_kappa(&[vec![3, 0], vec![3, 0]], 3).unwrap(), None);
        assert!(fleiss_kappa(&[vec![2, 0], vec![3, 0]], 3).is_err());
        assert!(fleiss_kappa(&[vec![3, 0]], 3).is_err());
    }

    #[test]
    fn quality_examples() {
        let m = |xs: &[bool]| -> BTreeMap<usize, bool> { xs.iter().copied().enumerate().collect() };
        let same = quality_score(&m(&[true, false, true]), &m(&[true, false, true]), 2.0).unwrap();
        assert_eq!(same.f_beta, 100.0);
        // P = 1, R = 0.5
        let half = quality_score(&m(&[true, false, false]), &m(&[true, true, false]), 2.0).unwrap();
        assert_abs_diff_eq!(half.f_beta, 500.0 / 9.0, epsilon = 1e-9);
        assert!(!half.qualifies() && half.rejects_batch());
        assert!(QualityScore { f_beta: 75.0, beta: 2.0 }.qualifies());
        assert!(!QualityScore { f_beta: 60.0, beta: 2.0 }.rejects_batch());
        assert_eq!(quality_score(&m(&[false]), &m(&[true]), 2.0).unwrap().f_beta, 0.0);
        assert!(quality_score(&m(&[true]), &m(&[true, false]), 2.0).is_err());
    }

    #[test]
    fn beta_limits() {
        // P = 1/3, R = 1
        let cand: BTreeMap<usize, bool> = [(0, true), (1, true), (2, true)].into();
        let refm: BTreeMap<usize, bool> = [(0, true), (1, false), (2, false)].into();
        let small = quality_score(&cand, &refm, 1e-4).unwrap().f_beta;
        let large = quality_score(&cand, &refm, 1e4).unwrap().f_beta;
        assert_abs_diff_eq!(small, 100.0 / 3.0, epsilon = 1e-3);
        assert_abs_diff_eq!(large, 100.0, epsilon = 1e-3);
    }

    proptest! {
        #[test]
        fn kappa_matches_oracle(rows in proptest::collection::vec((0u32..=4, 0u32..=4), 2..12)) {
            let n = 4;
            let m: Vec<Vec<u32>> = rows.iter().map(|&(a, b)| {
                let a = a.min(n);
                let b = b.min(n - a);
                vec![a, b, n - a - b]
            }).collect();
            match fleiss_kappa(&m, n).unwrap() {
                Some(k) => prop_assert!((k - kappa_oracle(&m)).abs() < 1e-9),
                None => prop_assert!(m.iter().all(|r| r == &m[0]) && m[0].contains(&n)),
            }
        }

        #[test]
        fn status_permutation_invariant(votes in proptest::collection::vec(any::<bool>(), 1..6), rot in 0usize..6) {
            let recs: Vec<AnnotationRecord> = votes.iter().map(|&u| rec("a", &[("s", true)], Some(if u { U } else { T }))).collect();
            let mut rotated = recs.clone();
            rotated.rotate_left(rot % recs.len());
            prop_assert_eq!(merge_status(&recs).q, merge_status(&rotated).q);
        }

        #[test]
        fn quality_self_is_100(xs in proptest::collection::vec(any::<bool>(), 1..20)) {
            prop_assume!(xs.iter().any(|&x| x));
            let m: BTreeMap<usize, bool> = xs.into_iter().enumerate().collect();
            prop_assert_eq!(quality_score(&m, &m, 2.0).unwrap().f_beta, 100.0);
        }
    }
}
