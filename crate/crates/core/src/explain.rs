//! Knowledge-graph grounded explanations and label audits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::mdd::{MddModel, PostFeatures, UserHistory};
use crate::{Error, KnowledgeGraph, Result};

pub const PRESENCE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presence {
    pub present: bool,
    /// Posts whose value reaches the threshold, in post order.
    pub posts: Vec<usize>,
}

/// Per-column presence over a post-by-symptom matrix: a symptom is present
/// when any post's value is `>= threshold`.
pub fn binarize(f_symp: &[Vec<f64>], n_symptoms: usize, threshold: f64) -> Vec<Presence> {
    (0..n_symptoms)
        .map(|j| {
            let posts: Vec<usize> = f_symp
                .iter()
                .enumerate()
                .filter(|(_, row)| row.get(j).is_some_and(|&v| v >= threshold))
                .map(|(i, _)| i)
                .collect();
            Presence {
                present: !posts.is_empty(),
                posts,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidencePost {
    pub post_index: usize,
    pub created_utc: i64,
    pub value: f64,
    pub excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymptomEvidence {
    pub symptom: String,
    pub name: String,
    pub present: bool,
    /// Sorted by value, highest first.
    pub evidence_posts: Vec<EvidencePost>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub user_id: String,
    pub disease: String,
    pub disease_name: String,
    pub typical: Vec<SymptomEvidence>,
    pub coverage: f64,
}

#[derive(Debug, Clone)]
pub struct ExplainOptions {
    pub threshold: f64,
    /// Excerpt length in characters.
    pub excerpt_chars: usize,
    /// Applied to excerpts before truncation, e.g. to mask names.
    pub redact: Option<fn(&str) -> String>,
}

impl Default for ExplainOptions {
    fn default() -> Self {
        Self {
            threshold: PRESENCE_THRESHOLD,
            excerpt_chars: 80,
            redact: None,
        }
    }
}

fn excerpt(text: &str, options: &ExplainOptions) -> String {
    let text = match options.redact {
        Some(f) => f(text),
        None => text.to_string(),
    };
    let flat = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if flat.chars().count() <= options.excerpt_chars {
        flat
    } else {
        let mut s: String = flat.chars().take(options.excerpt_chars).collect();
        s.push_str("...");
        s
    }
}

fn column_indices(kg: &KnowledgeGraph, disease: &str, symptom_order: &[String]) -> Result<Vec<(usize, String, String)>> {
    kg.typical_symptoms(disease)?
        .into_iter()
        .map(|s| {
            let j = symptom_order
                .iter()
                .position(|x| *x == s.id)
                .ok_or_else(|| Error::UnknownId {
                    kind: "feature column for symptom",
                    id: s.id.clone(),
                })?;
            Ok((j, s.id.clone(), s.name.clone()))
        })
        .collect()
}

/// Fraction of the disease's typical symptoms present in the history.
pub fn coverage(
    features: &[PostFeatures],
    kg: &KnowledgeGraph,
    disease: &str,
    symptom_order: &[String],
    threshold: f64,
) -> Result<f64> {
    let cols = column_indices(kg, disease, symptom_order)?;
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.f_symp.clone()).collect();
    let presence = binarize(&rows, symptom_order.len(), threshold);
    let present = cols.iter().filter(|(j, _, _)| presence[*j].present).count();
    Ok(present as f64 / cols.len() as f64)
}

/// Builds the explanation for one user and disease. `features` holds the
/// user's post features with columns in `symptom_order`.
pub fn explain_user(
    user: &UserHistory,
    features: &[PostFeatures],
    disease: &str,
    kg: &KnowledgeGraph,
    symptom_order: &[String],
    options: &ExplainOptions,
) -> Result<Explanation> {
    if features.len() > user.posts.len() {
        return Err(Error::InvalidArgument(format!(
            "{}: {} feature rows for {} posts",
            user.user_id,
            features.len(),
            user.posts.len()
        )));
    }
    let disease_name = kg.disease(disease)?.name.clone();
    let cols = column_indices(kg, disease, symptom_order)?;
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.f_symp.clone()).collect();
    let presence = binarize(&rows, symptom_order.len(), options.threshold);
    let mut typical = Vec::with_capacity(cols.len());
    for (j, symptom, name) in cols {
        let mut evidence_posts: Vec<EvidencePost> = presence[j]
            .posts
            .iter()
            .map(|&i| EvidencePost {
                post_index: i,
                created_utc: user.posts[i].created_utc,
                value: rows[i][j],
                excerpt: excerpt(&user.posts[i].text, options),
            })
            .collect();
        evidence_posts.sort_by(|a, b| b.value.total_cmp(&a.value));
        typical.push(SymptomEvidence {
            symptom,
            name,
            present: presence[j].present,
            evidence_posts,
        });
    }
    let coverage = typical.iter().filter(|e| e.present).count() as f64 / typical.len() as f64;
    Ok(Explanation {
        user_id: user.user_id.clone(),
        disease: disease.to_string(),
        disease_name,
        typical,
        coverage,
    })
}

/// Re-checks that every cited post exists and crosses the threshold.
pub fn verify_explanation(expl: &Explanation, features: &[PostFeatures], symptom_order: &[String], threshold: f64) -> bool {
    expl.typical.iter().all(|ev| {
        let Some(j) = symptom_order.iter().position(|s| *s == ev.symptom) else {
            return false;
        };
        ev.present == !ev.evidence_posts.is_empty()
            && ev.evidence_posts.iter().all(|p| {
                features
                    .get(p.post_index)
                    .is_some_and(|f| f.f_symp[j] >= threshold && f.f_symp[j] == p.value)
            })
    })
}

impl Explanation {
    /// Plain-text report: a summary line of check marks, then one aligned row
    /// per typical symptom with its strongest evidence.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "User: {}", self.user_id);
        let marks: Vec<String> = self
            .typical
            .iter()
            .map(|e| format!("{} {}", e.name, if e.present { '✓' } else { '✗' }))
            .collect();
        let _ = writeln!(out, "Typical {} symptoms: {}", self.disease_name, marks.join(" "));
        let _ = writeln!(out, "Coverage: {:.2}", self.coverage);
        let width = self.typical.iter().map(|e| e.name.chars().count()).max().unwrap_or(0);
        for e in &self.typical {
            let mark = if e.present { '✓' } else { '✗' };
            match e.evidence_posts.first() {
                Some(p) => {
                    let _ = writeln!(
                        out,
                        "  {:<width$}  {mark}  {:.3}  post {:>3}  {}",
                        e.name, p.value, p.post_index, p.excerpt
                    );
                }
                None => {
                    let _ = writeln!(out, "  {:<width$}  {mark}  -", e.name);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    SuspectFalsePositive,
    SuspectFalseNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelAuditFlag {
    pub user_id: String,
    pub disease: String,
    pub kind: AuditKind,
    pub coverage: f64,
    pub model_probability: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditThresholds {
    pub fp_coverage_max: f64,
    pub fn_coverage_min: f64,
    pub fn_probability_min: f64,
}

impl Default for AuditThresholds {
    fn default() -> Self {
        Self {
            fp_coverage_max: 0.2,
            fn_coverage_min: 0.6,
            fn_probability_min: 0.5,
        }
    }
}

/// Flags from precomputed coverages and model probabilities (keyed by
/// disease). Diseases without a coverage are not audited.
pub fn audit_scores(
    user_id: &str,
    labels: &BTreeMap<String, bool>,
    coverages: &BTreeMap<String, f64>,
    probabilities: &BTreeMap<String, f64>,
    thresholds: &AuditThresholds,
) -> Vec<LabelAuditFlag> {
    let mut flags = Vec::new();
    for (disease, &cov) in coverages {
        let labelled = labels.get(disease).copied().unwrap_or(false);
        let prob = probabilities.get(disease).copied();
        let kind = if labelled {
            (cov <= thresholds.fp_coverage_max).then_some(AuditKind::SuspectFalsePositive)
        } else {
            (cov >= thresholds.fn_coverage_min && prob.is_some_and(|p| p >= thresholds.fn_probability_min))
                .then_some(AuditKind::SuspectFalseNegative)
        };
        if let Some(kind) = kind {
            flags.push(LabelAuditFlag {
                user_id: user_id.to_string(),
                disease: disease.clone(),
                kind,
                coverage: cov,
                model_probability: prob,
            });
        }
    }
    flags
}

/// Audits every disease of the knowledge graph for one user.
pub fn audit_labels(
    user: &UserHistory,
    features: &[PostFeatures],
    kg: &KnowledgeGraph,
    symptom_order: &[String],
    models: &BTreeMap<String, MddModel>,
    thresholds: &AuditThresholds,
) -> Result<Vec<LabelAuditFlag>> {
    let mut coverages = BTreeMap::new();
    let mut probabilities = BTreeMap::new();
    let seq: Vec<Vec<f64>> = features.iter().map(|f| f.f_symp.clone()).collect();
    for d in kg.diseases() {
        coverages.insert(d.id.clone(), coverage(features, kg, &d.id, symptom_order, PRESENCE_THRESHOLD)?);
        if let Some(m) = models.get(&d.id) {
            if !seq.is_empty() {
                probabilities.insert(d.id.clone(), m.predict(&seq)?);
            }
        }
    }
    Ok(audit_scores(&user.user_id, &user.label, &coverages, &probabilities, thresholds))
}
