//! Symptom identification and symptom-assisted mental disease detection.
//!
//! The crate is organised as the pipeline runs:
//!
//! * [`kg`] loads the bipartite disease/symptom knowledge graph.
//! * [`embed`] holds sentence and sub-symptom embeddings and the
//!   max-over-sub-symptom relevance score.
//! * [`retrieval`] selects annotation candidates with bounded per-symptom
//!   queues, deduplicates them with MinHash/LSH and scores retrieval quality.
//! * [`corpus`] cleans posts, splits sentences, labels diagnosed users and
//!   builds dataset splits.
//! * [`annotations`] merges multi-annotator labels, computes Fleiss's kappa and
//!   the F-beta annotator quality score.
//! * [`classifier`] trains the TF-IDF relevance and status models under the
//!   three missing-label regimes and evaluates them.
//! * [`mdd`] turns posting histories into reweighted symptom features and
//!   trains per-disease detectors.
//! * [`explain`] renders knowledge-graph grounded explanations and label audits.
//! * [`synth`] generates seeded synthetic worlds used by tests and benchmarks.

pub mod annotations;
pub mod classifier;
pub mod corpus;
pub mod embed;
mod error;
pub mod explain;
pub mod hashing;
pub mod kg;
pub mod mdd;
pub mod retrieval;
pub mod synth;

pub use error::{Error, Result};
pub use kg::KnowledgeGraph;
