//! Annotation candidate retrieval.
//!
//! For one disease, every typical symptom gets a capacity-bounded queue; each
//! sentence is offered to every queue with its relevance to that symptom and
//! displaces the queue minimum only when strictly more relevant. The union of
//! the queues is then deduplicated with MinHash signatures and banded LSH.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{symptom_relevance, EmbeddingStore};
use crate::hashing::{fnv1a64, hash_str, splitmix64};
use crate::kg::KnowledgeGraph;
use crate::{Error, Result};

pub const DEFAULT_CAPACITY: usize = 300;

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    score: f64,
    /// Offer order; earlier offers win ties.
    seq: usize,
}

impl QueueEntry {
    /// Total "better than" order: higher score first, then earlier offer.
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.rank_cmp(other) == Ordering::Equal
    }
}
impl Eq for QueueEntry {}
impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank_cmp(other)
    }
}

/// Bounded min-heap holding the best-scoring sentences offered for one symptom.
#[derive(Debug, Clone)]
pub struct CandidateQueue {
    symptom: String,
    capacity: usize,
    heap: BinaryHeap<Reverse<QueueEntry>>,
    ids: HashMap<usize, String>,
}

impl CandidateQueue {
    pub fn new(symptom: impl Into<String>, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("queue capacity must be at least 1".into()));
        }
        Ok(Self {
            symptom: symptom.into(),
            capacity,
            heap: BinaryHeap::with_capacity(capacity + 1),
            ids: HashMap::new(),
        })
    }

    pub fn symptom(&self) -> &str {
        &self.symptom
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Offers a sentence. `seq` must increase with every call. Returns whether
    /// the sentence was admitted.
    pub fn offer(&mut self, seq: usize, id: &str, score: f64) -> bool {
        if score.is_nan() {
            return false;
        }
        let entry = QueueEntry { score, seq };
        if self.heap.len() < self.capacity {
            self.heap.push(Reverse(entry));
            self.ids.insert(seq, id.to_string());
            return true;
        }
        let min = self.heap.peek().expect("full queue is non-empty").0;
        if score > min.score {
            self.heap.pop();
            self.ids.remove(&min.seq);
            self.heap.push(Reverse(entry));
            self.ids.insert(seq, id.to_string());
            true
        } else {
            false
        }
    }

    /// Entries sorted best-first.
    pub fn entries(&self) -> Vec<(String, f64)> {
        let mut v: Vec<QueueEntry> = self.heap.iter().map(|r| r.0).collect();
        v.sort_by(|a, b| b.rank_cmp(a));
        v.into_iter().map(|e| (self.ids[&e.seq].clone(), e.score)).collect()
    }

    pub fn min_score(&self) -> Option<f64> {
        self.heap.peek().map(|r| r.0.score)
    }
}

#[derive(Debug, Clone)]
pub struct CandidateSelection {
    pub disease: String,
    pub queues: Vec<CandidateQueue>,
    order: Vec<String>,
}

impl CandidateSelection {
    /// Union of all queue contents in sentence input order.
    pub fn ids(&self) -> Vec<String> {
        let members: HashSet<String> = self
            .queues
            .iter()
            .flat_map(|q| q.entries().into_iter().map(|(id, _)| id))
            .collect();
        self.order.iter().filter(|id| members.contains(*id)).cloned().collect()
    }

    /// `(sentence_id, symptom_id, score)` rows, queue by queue, best first.
    pub fn rows(&self) -> Vec<(String, String, f64)> {
        self.queues
            .iter()
            .flat_map(|q| {
                q.entries()
                    .into_iter()
                    .map(move |(id, s)| (id, q.symptom().to_string(), s))
            })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (sid, sym, score) in self.rows() {
            writeln!(out, "{sid}\t{sym}\t{score}").unwrap();
        }
        out
    }
}

/// Runs the per-symptom bounded-queue selection for `disease`.
///
/// Relevance scores are computed in parallel; queue insertion happens
/// sequentially in input order so the result is independent of scheduling.
pub fn select_candidates(
    sentences: &[(String, Vec<f64>)],
    kg: &KnowledgeGraph,
    disease: &str,
    store: &EmbeddingStore,
    capacity: usize,
) -> Result<CandidateSelection> {
    let symptoms = kg.typical_symptoms(disease)?;
    let mut queues = symptoms
        .iter()
        .map(|s| CandidateQueue::new(s.id.clone(), capacity))
        .collect::<Result<Vec<_>>>()?;

    let scores: Vec<Vec<f64>> = sentences
        .par_iter()
        .map(|(_, v)| {
            symptoms
                .iter()
                .map(|s| symptom_relevance(v, s, store).map(|r| r.score))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    for (seq, ((id, _), row)) in sentences.iter().zip(&scores).enumerate() {
        for (queue, &score) in queues.iter_mut().zip(row) {
            queue.offer(seq, id, score);
        }
    }

    Ok(CandidateSelection {
        disease: disease.to_string(),
        queues,
        order: sentences.iter().map(|(id, _)| id.clone()).collect(),
    })
}

// ---------------------------------------------------------------------------
// MinHash / LSH

const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinHashSignature {
    pub values: Vec<u64>,
    pub shingle_size: usize,
}

impl MinHashSignature {
    /// Fraction of positions where the two signatures agree.
    pub fn match_fraction(&self, other: &Self) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "signature lengths differ");
        let same = self
            .values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a == b)
            .count();
        same as f64 / self.values.len() as f64
    }
}

/// Character shingles of `text`; texts shorter than `size` form one shingle.
pub fn shingles(text: &str, size: usize) -> HashSet<String> {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() <= size {
        return std::iter::once(text.to_string()).collect();
    }
    chars.windows(size).map(|w| w.iter().collect()).collect()
}

fn mul_mod_mersenne(a: u64, b: u64) -> u64 {
    let prod = u128::from(a) * u128::from(b);
    let lo = (prod & u128::from(MERSENNE_61)) as u64;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

/// `k` universal hash families `h_i(x) = (a_i * x + b_i) mod (2^61 - 1)`.
#[derive(Debug, Clone)]
pub struct MinHasher {
    coeffs: Vec<(u64, u64)>,
    shingle_size: usize,
}

impl MinHasher {
    pub fn new(k: usize, shingle_size: usize, seed: u64) -> Result<Self> {
        if k < 16 {
            return Err(Error::InvalidArgument(format!("MinHash needs k >= 16, got {k}")));
        }
        if shingle_size == 0 {
            return Err(Error::InvalidArgument("shingle size must be positive".into()));
        }
        let mut state = seed;
        let mut next = || {
            state = splitmix64(state);
            state
        };
        let coeffs = (0..k)
            .map(|_| {
                let a = next() % (MERSENNE_61 - 1) + 1;
                let b = next() % MERSENNE_61;
                (a, b)
            })
            .collect();
        Ok(Self {
            coeffs,
            shingle_size,
        })
    }

    pub fn signature(&self, text: &str) -> MinHashSignature {
        let mut values = vec![u64::MAX; self.coeffs.len()];
        for sh in shingles(text, self.shingle_size) {
            let x = fnv1a64(sh.as_bytes(), 0) % MERSENNE_61;
            for (slot, &(a, b)) in values.iter_mut().zip(&self.coeffs) {
                let h = (mul_mod_mersenne(a, x) + b) % MERSENNE_61;
                if h < *slot {
                    *slot = h;
                }
            }
        }
        MinHashSignature {
            values,
            shingle_size: self.shingle_size,
        }
    }
}

pub fn minhash_signature(text: &str, k: usize, shingle_size: usize, seed: u64) -> Result<MinHashSignature> {
    Ok(MinHasher::new(k, shingle_size, seed)?.signature(text))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DedupParams {
    pub bands: usize,
    pub rows: usize,
    pub k: usize,
    pub shingle_size: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for DedupParams {
    fn default() -> Self {
        Self {
            bands: 32,
            rows: 4,
            k: 128,
            shingle_size: 3,
            threshold: 0.8,
            seed: 0,
        }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Removes near-duplicates. Pairs colliding in any LSH band are confirmed
/// when their signature match fraction reaches `params.threshold`; each
/// connected component of confirmed pairs keeps only its lexicographically
/// smallest id. Survivors keep their input order.
pub fn lsh_dedup(candidates: &[(String, String)], params: &DedupParams) -> Result<Vec<String>> {
    if params.bands * params.rows != params.k {
        return Err(Error::InvalidArgument(format!(
            "bands x rows ({} x {}) must equal k = {}",
            params.bands, params.rows, params.k
        )));
    }
    let hasher = MinHasher::new(params.k, params.shingle_size, params.seed)?;
    let sigs: Vec<MinHashSignature> = candidates.par_iter().map(|(_, t)| hasher.signature(t)).collect();

    let n = candidates.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut checked: HashSet<(usize, usize)> = HashSet::new();
    for band in 0..params.bands {
        let span = band * params.rows..(band + 1) * params.rows;
        let mut buckets: HashMap<&[u64], Vec<usize>> = HashMap::new();
        for (i, sig) in sigs.iter().enumerate() {
            buckets.entry(&sig.values[span.clone()]).or_default().push(i);
        }
        let mut groups: Vec<Vec<usize>> = buckets.into_values().filter(|g| g.len() > 1).collect();
        groups.sort();
        for group in groups {
            for (gi, &i) in group.iter().enumerate() {
                for &j in &group[gi + 1..] {
                    if !checked.insert((i, j)) {
                        continue;
                    }
                    if sigs[i].match_fraction(&sigs[j]) >= params.threshold {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        if ri != rj {
                            parent[ri.max(rj)] = ri.min(rj);
                        }
                    }
                }
            }
        }
    }

    let mut representative: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        representative
            .entry(root)
            .and_modify(|best| {
                if candidates[i].0 < candidates[*best].0 {
                    *best = i;
                }
            })
            .or_insert(i);
    }
    let keep: HashSet<usize> = representative.into_values().collect();
    Ok((0..n)
        .filter(|i| keep.contains(i))
        .map(|i| candidates[i].0.clone())
        .collect())
}

// ---------------------------------------------------------------------------
// Evaluation and keyword baseline

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymptomRetrieval {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalEval {
    pub per_symptom: BTreeMap<String, SymptomRetrieval>,
    pub macro_precision: f64,
    pub macro_recall: f64,
}

/// Per-symptom precision/recall of `score >= threshold` retrieval over the
/// gold keys `(sentence_id, symptom_id)`. Macro means run over symptoms with
/// at least one gold positive; a symptom with no retrieved items has no
/// precision and is left out of the precision mean.
pub fn evaluate_retrieval(
    scores: &HashMap<(String, String), f64>,
    gold: &BTreeMap<(String, String), bool>,
    threshold: f64,
) -> RetrievalEval {
    let mut counts: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for ((sentence, symptom), &positive) in gold {
        let score = scores
            .get(&(sentence.clone(), symptom.clone()))
            .copied()
            .unwrap_or(-1.0);
        let retrieved = score >= threshold;
        let c = counts.entry(symptom).or_default();
        match (retrieved, positive) {
            (true, true) => c.0 += 1,
            (true, false) => c.1 += 1,
            (false, true) => c.2 += 1,
            (false, false) => {}
        }
    }
    let per_symptom: BTreeMap<String, SymptomRetrieval> = counts
        .into_iter()
        .map(|(s, (tp, fp, fn_))| {
            let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
            let recall = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
            (
                s.to_string(),
                SymptomRetrieval {
                    precision,
                    recall,
                    tp,
                    fp,
                    fn_,
                },
            )
        })
        .collect();
    let with_positives: Vec<&SymptomRetrieval> =
        per_symptom.values().filter(|r| r.recall.is_some()).collect();
    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let macro_recall = mean(with_positives.iter().filter_map(|r| r.recall).collect());
    let macro_precision = mean(with_positives.iter().filter_map(|r| r.precision).collect());
    RetrievalEval {
        per_symptom,
        macro_precision,
        macro_recall,
    }
}

/// Case-insensitive term list; a text matches when any term occurs on word
/// boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KeywordLexicon {
    terms: Vec<String>,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Char offsets of every word-bounded occurrence of `needle` in `haystack`.
/// Both inputs are expected to be lowercase already.
pub(crate) fn find_bounded(haystack: &[char], needle: &[char]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return Vec::new();
    }
    let mut hits = Vec::new();
    for start in 0..=haystack.len() - needle.len() {
        if &haystack[start..start + needle.len()] != needle {
            continue;
        }
        let end = start + needle.len();
        let left_ok = start == 0 || !(is_word_char(haystack[start - 1]) && is_word_char(needle[0]));
        let right_ok =
            end == haystack.len() || !(is_word_char(haystack[end]) && is_word_char(needle[needle.len() - 1]));
        if left_ok && right_ok {
            hits.push(start);
        }
    }
    hits
}

impl KeywordLexicon {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let terms: BTreeSet<String> = terms
            .into_iter()
            .map(|t| t.as_ref().trim().to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        Self {
            terms: terms.into_iter().collect(),
        }
    }

    /// One term per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self::new(text.lines().filter(|l| !l.trim_start().starts_with('#')))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn matches(&self, text: &str) -> bool {
        let hay: Vec<char> = text.to_lowercase().chars().collect();
        self.terms.iter().any(|t| {
            let needle: Vec<char> = t.chars().collect();
            !find_bounded(&hay, &needle).is_empty()
        })
    }

    pub fn to_text(&self) -> String {
        self.terms.iter().map(|t| format!("{t}\n")).collect()
    }
}

/// Keyword-baseline scores: 1.0 for a lexicon hit, 0.0 otherwise, over every
/// `(sentence, symptom)` pair that has a lexicon.
pub fn lexicon_scores(
    sentences: &[(String, String)],
    lexicons: &BTreeMap<String, KeywordLexicon>,
) -> HashMap<(String, String), f64> {
    let mut out = HashMap::new();
    for (sid, text) in sentences {
        for (sym, lex) in lexicons {
            let hit = if lex.matches(text) { 1.0 } else { 0.0 };
            out.insert((sid.clone(), sym.clone()), hit);
        }
    }
    out
}

/// Stable id for a text, used when deduplicating raw strings.
pub fn text_key(text: &str) -> String {
    format!("{:016x}", hash_str(text, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::hash_embed;
    use crate::kg::fixture_kg;

    fn brute_top(scores: &[f64], capacity: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..scores.len()).collect();
        idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        idx.truncate(capacity);
        idx.sort();
        idx
    }

    #[test]
    fn queue_keeps_top_k_with_stable_ties() {
        let scores = [0.3, 0.9, 0.1, 0.9, 0.5];
        let mut q = CandidateQueue::new("s", 2).unwrap();
        for (i, &s) in scores.iter().enumerate() {
            q.offer(i, &format!("x{i}"), s);
        }
        let ids: Vec<String> = q.entries().into_iter().map(|(id, _)| id).collect();
        assert_eq!(ids, ["x1", "x3"]);
        assert_eq!(brute_top(&scores, 2), [1, 3]);

        let mut q = CandidateQueue::new("s", 1).unwrap();
        q.offer(0, "first", 0.5);
        assert!(!q.offer(1, "second", 0.5));
        assert_eq!(q.entries()[0].0, "first");
        assert!(CandidateQueue::new("s", 0).is_err());
    }

    #[test]
    fn select_candidates_small() {
        let kg = fixture_kg();
        let store = crate::embed::embed_sub_symptoms(&kg, 64, 1).unwrap();
        let texts = [
            "i wash my hands until they bleed",
            "the bus was late",
            "i check the locks ten times before leaving",
            "intrusive thoughts all day",
            "nice weather",
        ];
        let sentences: Vec<(String, Vec<f64>)> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("s{i}"), hash_embed(t, 64, 1)))
            .collect();
        let all = select_candidates(&sentences, &kg, "ocd", &store, 300).unwrap();
        assert_eq!(all.ids().len(), 5);
        assert_eq!(all.queues.len(), 3);
        let top = select_candidates(&sentences, &kg, "ocd", &store, 1).unwrap();
        assert!(top.ids().len() <= 3);
        assert!(select_candidates(&[], &kg, "ocd", &store, 2).unwrap().ids().is_empty());
        assert!(select_candidates(&sentences, &kg, "nope", &store, 2).is_err());
    }

    #[test]
    fn minhash_determinism_and_params() {
        let a = minhash_signature("the same text", 128, 3, 9).unwrap();
        let b = minhash_signature("the same text", 128, 3, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values.len(), 128);
        assert!(minhash_signature("x", 8, 3, 9).is_err());
        // shorter than the shingle size: whole text is one shingle
        assert_eq!(shingles("ab", 3).len(), 1);
    }

    #[test]
    fn dedup_rules() {
        let p = DedupParams::default();
        let items = vec![
            ("b".to_string(), "i cannot sleep at night anymore".to_string()),
            ("a".to_string(), "i cannot sleep at night anymore".to_string()),
            ("c".to_string(), "the weather is lovely for a walk today".to_string()),
        ];
        assert_eq!(lsh_dedup(&items, &p).unwrap(), ["a", "c"]);
        let bad = DedupParams { bands: 10, ..p };
        assert!(lsh_dedup(&items, &bad).is_err());
        assert!(lsh_dedup(&[], &p).unwrap().is_empty());
    }

    #[test]
    fn dedup_chain_collapses_to_one() {
        // a ~ b and b ~ c with a low threshold; a and c are less similar.
        let p = DedupParams {
            threshold: 0.5,
            ..DedupParams::default()
        };
        let base = "abcdefghijklmnopqrstuvwxyz0123456789";
        let items = vec![
            ("x1".to_string(), base.to_string()),
            ("x2".to_string(), format!("{}ABCDEFGH", &base[..30])),
            ("x3".to_string(), format!("{}ABCDEFGHIJKLMNOP", &base[..24])),
        ];
        let h = MinHasher::new(128, 3, 0).unwrap();
        let s: Vec<_> = items.iter().map(|(_, t)| h.signature(t)).collect();
        assert!(s[0].match_fraction(&s[1]) >= 0.5);
        assert!(s[1].match_fraction(&s[2]) >= 0.5);
        assert_eq!(lsh_dedup(&items, &p).unwrap(), ["x1"]);
    }

    #[test]
    fn retrieval_eval_examples() {
        let key = |s: &str, y: &str| (s.to_string(), y.to_string());
        let gold: BTreeMap<_, _> = [
            (key("s1", "a"), true),
            (key("s2", "a"), false),
            (key("s3", "a"), true),
        ]
        .into();
        let scores: HashMap<_, _> = [(key("s1", "a"), 0.9), (key("s2", "a"), 0.8), (key("s3", "a"), 0.1)].into();
        let ev = evaluate_retrieval(&scores, &gold, 0.5);
        assert_eq!(ev.macro_precision, 0.5);
        assert_eq!(ev.macro_recall, 0.5);

        let perfect: HashMap<_, _> = [(key("s1", "a"), 1.0), (key("s2", "a"), 0.0), (key("s3", "a"), 1.0)].into();
        let ev = evaluate_retrieval(&perfect, &gold, 0.5);
        assert_eq!((ev.macro_precision, ev.macro_recall), (1.0, 1.0));

        // missing scores count as not retrieved
        let ev = evaluate_retrieval(&HashMap::new(), &gold, 0.5);
        assert_eq!(ev.macro_recall, 0.0);
        assert_eq!(ev.per_symptom["a"].precision, None);
    }

    #[test]
    fn lexicon_matching() {
        let lex = KeywordLexicon::parse("# comment\nPanic\n\nmood swings\n");
        assert_eq!(lex.terms(), ["mood swings", "panic"]);
        assert!(lex.matches("I had a PANIC attack"));
        assert!(lex.matches("crazy mood swings lately"));
        assert!(!lex.matches("panicked"));
        assert!(!lex.matches("nothing here"));
    }
}
