//! Dense unit-vector embeddings and symptom relevance scoring.
//!
//! Embeddings come either from a precomputed TSV file (one row per id) or from
//! [`hash_embed`], a deterministic character n-gram feature hasher used when no
//! external encoder output is available. Every stored vector has unit L2 norm,
//! so cosine similarity is a plain dot product.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use crate::hashing::hash_str;
use crate::kg::{KnowledgeGraph, Symptom};
use crate::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceScore {
    pub symptom: String,
    pub score: f64,
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dim must be positive".into()));
        }
        Ok(Self {
            dim,
            entries: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.entries.get(id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Inserts a vector, renormalising it when its norm is off by more than
    /// 1e-6. Zero vectors, wrong dimensions and duplicate ids are rejected.
    pub fn insert(&mut self, id: impl Into<String>, mut vector: Vec<f64>) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                id,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("embedding `{id}` has non-finite components")));
        }
        let norm = l2_norm(&vector);
        if norm == 0.0 {
            return Err(Error::Validation(format!("embedding `{id}` has zero norm")));
        }
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            vector.iter_mut().for_each(|x| *x /= norm);
        }
        if self.entries.contains_key(&id) {
            return Err(Error::Validation(format!("duplicate embedding id `{id}`")));
        }
        self.entries.insert(id, vector);
        Ok(())
    }

    /// Parses the TSV layout: optional `#dim=<n>` first line, then
    /// `id<TAB>x1<TAB>...<TAB>xn` rows.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut store: Option<EmbeddingStore> = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::parse("embeddings", e))?;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if lineno == 0 {
                    if let Some(n) = rest.trim().strip_prefix("dim=") {
                        let n = n
                            .trim()
                            .parse::<usize>()
                            .map_err(|e| Error::parse("embeddings header", e))?;
                        declared = Some(n);
                    }
                }
                continue;
            }
            let mut fields = line.split('\t');
            let id = fields.next().unwrap_or_default().to_string();
            let values = fields
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(format!("embedding row `{id}` (line {})", lineno + 1), e))?;
            let store = match store.as_mut() {
                Some(s) => s,
                None => store.insert(EmbeddingStore::new(declared.unwrap_or(values.len()))?),
            };
            store.insert(id, values)?;
        }
        match store {
            Some(s) => Ok(s),
            None => EmbeddingStore::new(declared.unwrap_or(1)),
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("#dim={}\n", self.dim);
        for (id, v) in &self.entries {
            out.push_str(id);
            for x in v {
                write!(out, "\t{x}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingStore::from_reader(std::io::BufReader::new(file))
}

/// Signed feature hashing of lowercase character 3-, 4- and 5-grams,
/// L2-normalised. Empty input (or an input whose hashed features cancel
/// exactly) maps to the first basis vector.
pub fn hash_embed(text: &str, dim: usize, seed: u64) -> Vec<f64> {
    assert!(dim >= 8, "hash_embed requires dim >= 8");
    let mut v = vec![0.0; dim];
    let lowered = text.to_lowercase();
    let trimmed = lowered.trim();
    if !trimmed.is_empty() {
        let padded: Vec<char> = format!(" {trimmed} ").chars().collect();
        let mut gram = String::new();
        for n in 3..=5 {
            if padded.len() < n {
                continue;
            }
            for window in padded.windows(n) {
                gram.clear();
                gram.extend(window);
                let h = hash_str(&gram, seed);
                let bucket = (h % dim as u64) as usize;
                let sign = if (h >> 63) & 1 == 1 { -1.0 } else { 1.0 };
                v[bucket] += sign;
            }
        }
    }
    let norm = l2_norm(&v);
    if norm == 0.0 {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            id: "cosine operand".into(),
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(u.iter().zip(v).map(|(a, b)| a * b).sum())
}

/// Max cosine between `sentence` and each of the symptom's sub-symptoms.
pub fn symptom_relevance(
    sentence: &[f64],
    symptom: &Symptom,
    store: &EmbeddingStore,
) -> Result<RelevanceScore> {
    let mut best = f64::NEG_INFINITY;
    for i in 0..symptom.sub_symptoms.len() {
        let id = symptom.sub_symptom_id(i);
        let sub = store.get(&id).ok_or(Error::MissingEmbedding(id))?;
        best = best.max(cosine(sentence, sub)?);
    }
    Ok(RelevanceScore {
        symptom: symptom.id.clone(),
        score: best,
    })
}

/// Hash-embeds every sub-symptom description of the graph under its
/// `<symptom_id>#<index>` id.
pub fn embed_sub_symptoms(kg: &KnowledgeGraph, dim: usize, seed: u64) -> Result<EmbeddingStore> {
    let mut store = EmbeddingStore::new(dim)?;
    for s in kg.symptoms() {
        for (i, sub) in s.sub_symptoms.iter().enumerate() {
            store.insert(s.sub_symptom_id(i), hash_embed(&sub.text, dim, seed))?;
        }
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{SubSymptom, SubSymptomSource};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn load_three_rows() {
        let tsv = "#dim=4\na\t1\t0\t0\t0\nb\t0\t1\t0\t0\nc\t2\t0\t0\t0\n";
        let store = EmbeddingStore::from_reader(tsv.as_bytes()).unwrap();
        assert_eq!(store.dim(), 4);
        assert_eq!(store.len(), 3);
        assert_eq!(store.get("c").unwrap(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn load_errors() {
        let err = EmbeddingStore::from_reader("a\t1\t0\t0\t0\nbad\t1\t0\t0\t0\t0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { ref id, expected: 4, found: 5 } if id == "bad"));
        let err = EmbeddingStore::from_reader("a\t0\t0\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("zero norm"));
        let err = EmbeddingStore::from_reader("a\t1\t0\na\t0\t1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn tsv_round_trip() {
        let mut store = EmbeddingStore::new(8).unwrap();
        store.insert("x", hash_embed("hello there", 8, 1)).unwrap();
        store.insert("y", hash_embed("general kenobi", 8, 1)).unwrap();
        let back = EmbeddingStore::from_reader(store.to_tsv().as_bytes()).unwrap();
        assert_eq!(back, store);
    }

    #[test]
    fn hash_embed_basics() {
        let a = hash_embed("i cannot sleep at night", 64, 7);
        let b = hash_embed("i cannot sleep at night", 64, 7);
        assert_eq!(a, b);
        assert_abs_diff_eq!(l2_norm(&a), 1.0, epsilon = 1e-12);
        let mut e1 = vec![0.0; 64];
        e1[0] = 1.0;
        assert_eq!(hash_embed("", 64, 7), e1);
        assert_eq!(hash_embed("   ", 64, 7), e1);
        assert_eq!(hash_embed("ab", 64, 7).len(), 64);
    }

    #[test]
    fn hash_embed_prefers_near_edits() {
        // A single-character edit should stay closer than an unrelated string.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyz ".chars().collect();
        let random_text = |rng: &mut ChaCha8Rng, len: usize| -> String {
            (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
        };
        let mut wins = 0;
        for _ in 0..100 {
            let s = random_text(&mut rng, 40);
            let mut edited: Vec<char> = s.chars().collect();
            let pos = rng.random_range(0..edited.len());
            edited[pos] = alphabet[rng.random_range(0..26)];
            let edited: String = edited.into_iter().collect();
            let other = random_text(&mut rng, 40);
            let base = hash_embed(&s, 64, 7);
            let near = cosine(&base, &hash_embed(&edited, 64, 7)).unwrap();
            let far = cosine(&base, &hash_embed(&other, 64, 7)).unwrap();
            if near > far {
                wins += 1;
            }
        }
        assert!(wins >= 90, "near edit closer in only {wins}/100 trials");
    }

    #[test]
    fn cosine_examples() {
        let v = hash_embed("something", 16, 3);
        assert_abs_diff_eq!(cosine(&v, &v).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(cosine(&[1.0, 0.0], &[h, h]).unwrap(), 0.7071, epsilon = 1e-4);
        assert!(cosine(&[1.0], &[1.0, 0.0]).is_err());
    }

    fn symptom_with(n: usize) -> Symptom {
        Symptom {
            id: "s".into(),
            name: "S".into(),
            sub_symptoms: (0..n)
                .map(|i| SubSymptom {
                    text: format!("sub {i}"),
                    source: SubSymptomSource::Manual,
                })
                .collect(),
        }
    }

    #[test]
    fn relevance_is_max_over_sub_symptoms() {
        let mut store = EmbeddingStore::new(2).unwrap();
        let angle = |c: f64| vec![c, (1.0 - c * c).sqrt()];
        store.insert("s#0", angle(0.2)).unwrap();
        store.insert("s#1", angle(0.9)).unwrap();
        store.insert("s#2", angle(0.4)).unwrap();
        let score = symptom_relevance(&[1.0, 0.0], &symptom_with(3), &store).unwrap();
        assert_abs_diff_eq!(score.score, 0.9, epsilon = 1e-12);
        let exact = symptom_relevance(&angle(0.4), &symptom_with(3), &store).unwrap();
        assert_abs_diff_eq!(exact.score, 1.0, epsilon = 1e-12);

        let err = symptom_relevance(&[1.0, 0.0], &symptom_with(4), &store).unwrap_err();
        assert!(err.to_string().contains("s#3"));
    }

    proptest! {
        #[test]
        fn relevance_matches_brute_force_and_is_monotone(
            texts in proptest::collection::vec("[a-z ]{0,30}", 1..6),
            sentence in "[a-z ]{0,30}",
        ) {
            let dim = 32;
            let mut store = EmbeddingStore::new(dim).unwrap();
            for (i, t) in texts.iter().enumerate() {
                store.insert(format!("s#{i}"), hash_embed(t, dim, 5)).unwrap();
            }
            let v = hash_embed(&sentence, dim, 5);
            let mut brute = f64::NEG_INFINITY;
            for i in 0..texts.len() {
                let sub = store.get(&format!("s#{i}")).unwrap();
                let dot: f64 = v.iter().zip(sub).map(|(a, b)| a * b).sum();
                brute = brute.max(dot);
            }
            let got = symptom_relevance(&v, &symptom_with(texts.len()), &store).unwrap().score;
            prop_assert_eq!(got, brute);
            prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&got));
            if texts.len() > 1 {
                let fewer = symptom_relevance(&v, &symptom_with(texts.len() - 1), &store).unwrap().score;
                prop_assert!(fewer <= got);
            }
        }
    }
}
