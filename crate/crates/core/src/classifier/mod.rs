//! TF-IDF features with linear relevance and status heads.

pub mod linear;
pub mod metrics;
pub mod relevance;
pub mod sampler;
pub mod status;
pub mod tfidf;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use linear::{LinearHeads, TrainConfig};
pub use metrics::{auc, f1_at, mae_bounds, mean_absolute_error, Confusion, MaeBounds};
pub use relevance::{
    achieved_tnr, enhance_labels, eval_relevance, tnr_threshold, train_relevance, EnhanceReport, LabelMask,
    LabelState, MaskMode, RelevanceData, RelevanceEval, RelevanceModel, SymptomScores, TrainReport, ENHANCE_TNR,
};
pub use sampler::{balanced_batches, BalancedBatches};
pub use status::{eval_status, train_status, StatusEval, StatusModel};
pub use tfidf::{fit_tfidf, SparseVec, TfidfConfig, TfidfVectorizer};

use crate::{Error, Result};

/// On-disk format version for model files.
pub const MODEL_VERSION: u32 = 1;

/// Vectoriser plus relevance heads, as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceArtifact {
    pub version: u32,
    pub vectorizer: TfidfVectorizer,
    pub model: RelevanceModel,
}

/// Vectoriser plus status head, as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusArtifact {
    pub version: u32,
    pub vectorizer: TfidfVectorizer,
    pub model: StatusModel,
}

impl RelevanceArtifact {
    pub fn new(vectorizer: TfidfVectorizer, model: RelevanceModel) -> Self {
        Self {
            version: MODEL_VERSION,
            vectorizer,
            model,
        }
    }

    pub fn score(&self, text: &str) -> Vec<f64> {
        self.model.predict(&self.vectorizer.transform(text))
    }
}

impl StatusArtifact {
    pub fn new(vectorizer: TfidfVectorizer, model: StatusModel) -> Self {
        Self {
            version: MODEL_VERSION,
            vectorizer,
            model,
        }
    }

    pub fn score(&self, text: &str) -> f64 {
        self.model.predict(&self.vectorizer.transform(text))
    }
}

pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = serde_json::to_string(value).map_err(|e| Error::parse("model", e))?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

fn load_versioned<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::parse(what, e))?;
    let version = raw.get("version").and_then(serde_json::Value::as_u64);
    if version != Some(u64::from(MODEL_VERSION)) {
        return Err(Error::Validation(format!(
            "{what} version {version:?} unsupported (expected {MODEL_VERSION})"
        )));
    }
    serde_json::from_value(raw).map_err(|e| Error::parse(what, e))
}

pub fn load_relevance(path: impl AsRef<Path>) -> Result<RelevanceArtifact> {
    let a: RelevanceArtifact = load_versioned(path.as_ref(), "relevance model")?;
    if a.model.params.n_features() > a.vectorizer.n_features() {
        return Err(Error::Validation("relevance weights exceed vocabulary".into()));
    }
    if !a.model.params.is_finite() {
        return Err(Error::Validation("relevance model has non-finite weights".into()));
    }
    Ok(a)
}

pub fn load_status(path: impl AsRef<Path>) -> Result<StatusArtifact> {
    let a: StatusArtifact = load_versioned(path.as_ref(), "status model")?;
    if a.model.params.heads() != 1 || !a.model.params.is_finite() {
        return Err(Error::Validation("status model must be one finite head".into()));
    }
    Ok(a)
}
