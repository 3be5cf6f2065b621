use std::collections::{BTreeMap, HashMap};

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sparse row with strictly increasing column indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn from_dense(dense: &[f64]) -> Self {
        let mut v = SparseVec::default();
        for (i, &x) in dense.iter().enumerate() {
            if x != 0.0 {
                v.indices.push(i as u32);
                v.values.push(x);
            }
        }
        v
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Dot product with a dense vector; columns past its end count as zero.
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| dense.get(i as usize).map_or(0.0, |w| w * v))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.values.iter().copied())
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TfidfConfig {
    pub min_df: usize,
    pub max_features: Option<usize>,
    pub lowercase: bool,
    pub token_pattern: String,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        Self {
            min_df: 1,
            max_features: None,
            lowercase: true,
            token_pattern: r"(?u)\b\w+\b".to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TfidfFile {
    config: TfidfConfig,
    terms: Vec<String>,
    idf: Vec<f64>,
}

/// Fitted TF-IDF vectoriser: `tf = count / tokens`, `idf = ln((1+N)/(1+df)) + 1`,
/// rows L2-normalised. Vocabulary columns are terms in sorted order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "TfidfFile", into = "TfidfFile")]
pub struct TfidfVectorizer {
    config: TfidfConfig,
    terms: Vec<String>,
    idf: Vec<f64>,
    vocabulary: HashMap<String, u32>,
    token_re: Regex,
}

impl PartialEq for TfidfVectorizer {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.terms == other.terms && self.idf == other.idf
    }
}

impl TryFrom<TfidfFile> for TfidfVectorizer {
    type Error = Error;

    fn try_from(f: TfidfFile) -> Result<Self> {
        if f.terms.len() != f.idf.len() {
            return Err(Error::Validation("vocabulary and idf lengths differ".into()));
        }
        if f.idf.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Validation("idf weights must be positive".into()));
        }
        let token_re = Regex::new(&f.config.token_pattern).map_err(|e| Error::parse("token pattern", e))?;
        let vocabulary = f
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Self {
            config: f.config,
            terms: f.terms,
            idf: f.idf,
            vocabulary,
            token_re,
        })
    }
}

impl From<TfidfVectorizer> for TfidfFile {
    fn from(v: TfidfVectorizer) -> Self {
        TfidfFile {
            config: v.config,
            terms: v.terms,
            idf: v.idf,
        }
    }
}

fn tokenize<'a>(re: &Regex, lowercase: bool, text: &'a str) -> Vec<String> {
    let owned;
    let text = if lowercase {
        owned = text.to_lowercase();
        owned.as_str()
    } else {
        text
    };
    re.find_iter(text).map(|m| m.as_str().to_string()).collect()
}

pub fn fit_tfidf<S: AsRef<str>>(documents: &[S], config: &TfidfConfig) -> Result<TfidfVectorizer> {
    let token_re = Regex::new(&config.token_pattern).map_err(|e| Error::parse("token pattern", e))?;
    if documents.is_empty() {
        return Err(Error::InvalidArgument("cannot fit TF-IDF on an empty corpus".into()));
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut any_tokens = false;
    for doc in documents {
        let mut tokens = tokenize(&token_re, config.lowercase, doc.as_ref());
        any_tokens |= !tokens.is_empty();
        tokens.sort();
        tokens.dedup();
        for t in tokens {
            *df.entry(t).or_default() += 1;
        }
    }
    if !any_tokens {
        return Err(Error::InvalidArgument("TF-IDF corpus has no tokens".into()));
    }
    let mut kept: Vec<(String, usize)> = df.into_iter().filter(|(_, c)| *c >= config.min_df).collect();
    if let Some(max) = config.max_features {
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        kept.truncate(max);
        kept.sort_by(|a, b| a.0.cmp(&b.0));
    }
    let n = documents.len() as f64;
    let idf = kept
        .iter()
        .map(|(_, c)| ((1.0 + n) / (1.0 + *c as f64)).ln() + 1.0)
        .collect();
    let terms: Vec<String> = kept.into_iter().map(|(t, _)| t).collect();
    let vocabulary = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    Ok(TfidfVectorizer {
        config: config.clone(),
        terms,
        idf,
        vocabulary,
        token_re,
    })
}

impl TfidfVectorizer {
    pub fn n_features(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn transform(&self, text: &str) -> SparseVec {
        let tokens = tokenize(&self.token_re, self.config.lowercase, text);
        if tokens.is_empty() {
            return SparseVec::default();
        }
        let len = tokens.len() as f64;
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for t in &tokens {
            if let Some(&col) = self.vocabulary.get(t) {
                *counts.entry(col).or_default() += 1.0;
            }
        }
        let mut v = SparseVec::default();
        for (col, c) in counts {
            v.indices.push(col);
            v.values.push(c / len * self.idf[col as usize]);
        }
        let norm = v.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.values.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    pub fn transform_all<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<SparseVec> {
        use rayon::prelude::*;
        texts.par_iter().map(|t| self.transform(t.as_ref())).collect()
    }
}
