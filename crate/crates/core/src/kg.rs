//! Bipartite disease/symptom knowledge graph.
//!
//! Symptoms carry an ordered list of sub-symptom descriptions (clinical
//! manual phrasings, questionnaire items and representative posts). Relevance
//! scoring and annotation queues are both driven by the disease → symptom
//! edges stored here.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubSymptomSource {
    Manual,
    Questionnaire,
    Post,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSymptom {
    pub text: String,
    pub source: SubSymptomSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symptom {
    pub id: String,
    pub name: String,
    pub sub_symptoms: Vec<SubSymptom>,
}

impl Symptom {
    /// Embedding-store id of the `index`-th sub-symptom.
    pub fn sub_symptom_id(&self, index: usize) -> String {
        sub_symptom_id(&self.id, index)
    }
}

pub fn sub_symptom_id(symptom_id: &str, index: usize) -> String {
    format!("{symptom_id}#{index}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disease {
    pub id: String,
    pub name: String,
}

/// On-disk layout: `{"diseases": [...], "symptoms": [...], "edges": [[d, s], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct KgFile {
    diseases: Vec<Disease>,
    symptoms: Vec<Symptom>,
    edges: Vec<(String, String)>,
}

/// Immutable, validated knowledge graph.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeGraph {
    diseases: Vec<Disease>,
    symptoms: Vec<Symptom>,
    edges: BTreeSet<(String, String)>,
    disease_index: HashMap<String, usize>,
    symptom_index: HashMap<String, usize>,
}

/// Lowercase snake-case slug: alphanumeric runs joined by `_`.
pub fn slugify(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_sep = false;
    for ch in name.chars() {
        if ch.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_sep = true;
        }
    }
    out
}

impl KnowledgeGraph {
    pub fn new(
        diseases: Vec<Disease>,
        symptoms: Vec<Symptom>,
        edges: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self> {
        let mut disease_index = HashMap::new();
        for (i, d) in diseases.iter().enumerate() {
            if d.id.is_empty() {
                return Err(Error::Validation(format!("disease #{i} has an empty id")));
            }
            if disease_index.insert(d.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate disease id `{}`", d.id)));
            }
        }

        let mut symptom_index = HashMap::new();
        for (i, s) in symptoms.iter().enumerate() {
            let slug = slugify(&s.name);
            if s.id != slug {
                return Err(Error::Validation(format!(
                    "symptom id `{}` is not the slug of its name `{}` (expected `{slug}`)",
                    s.id, s.name
                )));
            }
            if symptom_index.insert(s.id.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "symptom slug collision on `{}`",
                    s.id
                )));
            }
            if disease_index.contains_key(&s.id) {
                return Err(Error::Validation(format!(
                    "id `{}` is used by both a disease and a symptom",
                    s.id
                )));
            }
            if s.sub_symptoms.is_empty() {
                return Err(Error::Validation(format!(
                    "symptom `{}` has no sub-symptoms",
                    s.id
                )));
            }
            if let Some(k) = s.sub_symptoms.iter().position(|x| x.text.trim().is_empty()) {
                return Err(Error::Validation(format!(
                    "sub-symptom `{}` has empty text",
                    s.sub_symptom_id(k)
                )));
            }
        }

        let mut edge_set = BTreeSet::new();
        for (d, s) in edges {
            if !disease_index.contains_key(&d) {
                let msg = if symptom_index.contains_key(&d) {
                    format!("edge ({d}, {s}) starts at symptom `{d}`; edges must be (disease, symptom)")
                } else {
                    format!("edge ({d}, {s}) references unknown disease `{d}`")
                };
                return Err(Error::Validation(msg));
            }
            if !symptom_index.contains_key(&s) {
                let msg = if disease_index.contains_key(&s) {
                    format!("edge ({d}, {s}) ends at disease `{s}`; edges must be (disease, symptom)")
                } else {
                    format!("edge ({d}, {s}) references unknown symptom `{s}`")
                };
                return Err(Error::Validation(msg));
            }
            edge_set.insert((d, s));
        }

        for d in &diseases {
            if !edge_set.iter().any(|(ed, _)| ed == &d.id) {
                return Err(Error::Validation(format!("disease `{}` has no edges", d.id)));
            }
        }
        for s in &symptoms {
            if !edge_set.iter().any(|(_, es)| es == &s.id) {
                return Err(Error::Validation(format!("symptom `{}` has no edges", s.id)));
            }
        }

        Ok(Self {
            diseases,
            symptoms,
            edges: edge_set,
            disease_index,
            symptom_index,
        })
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let file: KgFile = serde_json::from_str(json).map_err(|e| Error::parse("knowledge graph", e))?;
        Self::new(file.diseases, file.symptoms, file.edges)
    }

    pub fn to_json_string(&self) -> String {
        let file = KgFile {
            diseases: self.diseases.clone(),
            symptoms: self.symptoms.clone(),
            edges: self.edges.iter().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("knowledge graph serialises")
    }

    pub fn diseases(&self) -> &[Disease] {
        &self.diseases
    }

    pub fn symptoms(&self) -> &[Symptom] {
        &self.symptoms
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn disease(&self, id: &str) -> Result<&Disease> {
        self.disease_index
            .get(id)
            .map(|&i| &self.diseases[i])
            .ok_or_else(|| Error::UnknownId {
                kind: "disease",
                id: id.to_string(),
            })
    }

    pub fn symptom(&self, id: &str) -> Result<&Symptom> {
        self.symptom_index
            .get(id)
            .map(|&i| &self.symptoms[i])
            .ok_or_else(|| Error::UnknownId {
                kind: "symptom",
                id: id.to_string(),
            })
    }

    /// Position of the symptom in [`Self::symptoms`]; this is also the model
    /// column order used by the classifiers.
    pub fn symptom_position(&self, id: &str) -> Option<usize> {
        self.symptom_index.get(id).copied()
    }

    pub fn symptom_ids(&self) -> Vec<String> {
        self.symptoms.iter().map(|s| s.id.clone()).collect()
    }

    /// Symptoms linked to `disease`, in graph symptom order.
    pub fn typical_symptoms(&self, disease: &str) -> Result<Vec<&Symptom>> {
        self.disease(disease)?;
        Ok(self
            .symptoms
            .iter()
            .filter(|s| self.edges.contains(&(disease.to_string(), s.id.clone())))
            .collect())
    }

    pub fn typical_symptom_ids(&self, disease: &str) -> Result<BTreeSet<String>> {
        Ok(self
            .typical_symptoms(disease)?
            .into_iter()
            .map(|s| s.id.clone())
            .collect())
    }

    pub fn diseases_of(&self, symptom: &str) -> Result<BTreeSet<String>> {
        self.symptom(symptom)?;
        Ok(self
            .edges
            .iter()
            .filter(|(_, s)| s == symptom)
            .map(|(d, _)| d.clone())
            .collect())
    }

    /// Number of diseases each symptom is linked to.
    pub fn sharing_degrees(&self) -> BTreeMap<String, usize> {
        let mut out: BTreeMap<String, usize> = BTreeMap::new();
        for (_, s) in &self.edges {
            *out.entry(s.clone()).or_default() += 1;
        }
        out
    }
}

pub fn load_kg(path: impl AsRef<Path>) -> Result<KnowledgeGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    KnowledgeGraph::from_json_str(&text)
}

/// The bundled fixture graph: five diseases, twelve symptoms, four of them
/// shared across diseases.
pub fn fixture_kg() -> KnowledgeGraph {
    KnowledgeGraph::from_json_str(include_str!("../data/fixture_kg.json"))
        .expect("bundled fixture graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> KnowledgeGraph {
        let json = r#"{
          "diseases": [{"id": "a", "name": "A"}, {"id": "b", "name": "B"}],
          "symptoms": [
            {"id": "s1", "name": "S1", "sub_symptoms": [{"text": "one", "source": "manual"}]},
            {"id": "s2", "name": "S2", "sub_symptoms": [{"text": "two", "source": "questionnaire"}]},
            {"id": "s3", "name": "S3", "sub_symptoms": [{"text": "three", "source": "post"}]}
          ],
          "edges": [["a", "s1"], ["a", "s2"], ["b", "s2"], ["b", "s3"]]
        }"#;
        KnowledgeGraph::from_json_str(json).unwrap()
    }

    #[test]
    fn counts_and_queries() {
        let kg = small();
        assert_eq!((kg.diseases().len(), kg.symptoms().len(), kg.edges().len()), (2, 3, 4));
        assert_eq!(
            kg.typical_symptom_ids("a").unwrap(),
            ["s1", "s2"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(kg.diseases_of("s2").unwrap().len(), 2);
        assert_eq!(kg.diseases_of("s3").unwrap(), ["b".to_string()].into());
        assert!(matches!(kg.typical_symptoms("zzz"), Err(Error::UnknownId { .. })));
        assert!(matches!(kg.diseases_of("zzz"), Err(Error::UnknownId { .. })));
    }

    #[test]
    fn rejects_dangling_edge() {
        let json = r#"{"diseases": [{"id": "a", "name": "A"}],
          "symptoms": [{"id": "s1", "name": "S1", "sub_symptoms": [{"text": "x", "source": "manual"}]}],
          "edges": [["a", "s1"], ["a", "ghost"]]}"#;
        let err = KnowledgeGraph::from_json_str(json).unwrap_err().to_string();
        assert!(err.contains("ghost"), "{err}");
    }

    #[test]
    fn rejects_empty_sub_symptoms_and_isolated_nodes() {
        let json = r#"{"diseases": [{"id": "a", "name": "A"}],
          "symptoms": [{"id": "s1", "name": "S1", "sub_symptoms": []}],
          "edges": [["a", "s1"]]}"#;
        let err = KnowledgeGraph::from_json_str(json).unwrap_err().to_string();
        assert!(err.contains("s1") && err.contains("no sub-symptoms"), "{err}");

        let json = r#"{"diseases": [{"id": "a", "name": "A"}, {"id": "b", "name": "B"}],
          "symptoms": [{"id": "s1", "name": "S1", "sub_symptoms": [{"text": "x", "source": "manual"}]}],
          "edges": [["a", "s1"]]}"#;
        let err = KnowledgeGraph::from_json_str(json).unwrap_err().to_string();
        assert!(err.contains("`b`"), "{err}");
    }

    #[test]
    fn rejects_non_bipartite_edge_and_bad_slug() {
        let json = r#"{"diseases": [{"id": "a", "name": "A"}, {"id": "b", "name": "B"}],
          "symptoms": [{"id": "s1", "name": "S1", "sub_symptoms": [{"text": "x", "source": "manual"}]}],
          "edges": [["a", "s1"], ["b", "s1"], ["a", "b"]]}"#;
        assert!(KnowledgeGraph::from_json_str(json).is_err());

        let json = r#"{"diseases": [{"id": "a", "name": "A"}],
          "symptoms": [{"id": "Anxious", "name": "Anxious Mood", "sub_symptoms": [{"text": "x", "source": "manual"}]}],
          "edges": [["a", "Anxious"]]}"#;
        let err = KnowledgeGraph::from_json_str(json).unwrap_err().to_string();
        assert!(err.contains("anxious_mood"), "{err}");

        let json = r#"{"diseases": [{"id": "a", "name": "A"}],
          "symptoms": [
            {"id": "low_mood", "name": "Low mood", "sub_symptoms": [{"text": "x", "source": "manual"}]},
            {"id": "low_mood", "name": "Low-Mood", "sub_symptoms": [{"text": "y", "source": "manual"}]}],
          "edges": [["a", "low_mood"]]}"#;
        assert!(KnowledgeGraph::from_json_str(json).unwrap_err().to_string().contains("collision"));
    }

    #[test]
    fn slugs() {
        assert_eq!(slugify("Anxious Mood"), "anxious_mood");
        assert_eq!(slugify("  Do things -- easily!"), "do_things_easily");
        assert_eq!(slugify("Sleep/Wake problems"), "sleep_wake_problems");
    }

    #[test]
    fn fixture_is_valid_and_shares_symptoms() {
        let kg = fixture_kg();
        assert!(kg.diseases().len() >= 2 && kg.symptoms().len() >= 5);
        let shared = kg.sharing_degrees().values().filter(|&&d| d >= 2).count();
        assert!(shared >= 1);
        let ocd: Vec<_> = kg
            .typical_symptoms("ocd")
            .unwrap()
            .iter()
            .map(|s| s.name.as_str())
            .collect();
        assert_eq!(ocd, ["Obsession", "Compulsion", "Anxious Mood"]);
    }
}
