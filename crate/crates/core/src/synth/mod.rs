//! Seeded synthetic worlds.
//!
//! Everything here is generated from the hand-written material in
//! `material.rs` and a seed, so tests, benchmarks and the CLI fixtures share
//! one ground truth: five diseases over twelve symptoms, four of which are
//! typical for more than one disease.

mod material;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{LabelMask, LabelState};
use crate::corpus::{sentence_id, DiagnosisRule, RawPost};
use crate::kg::{Disease, KnowledgeGraph, SubSymptom, SubSymptomSource, Symptom};
use crate::mdd::{UserHistory, UserPost};
use crate::retrieval::KeywordLexicon;

use material::{
    DiseaseMaterial, SymptomMaterial, DISEASES, FILLER_WORDS, GENERIC_CLAUSES, KEYWORD_DISTRACTORS, SHARED_FRAGMENTS,
    STATUS_WRAPPERS, SYMPTOMS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Person {
    First,
    /// Third person; `true` renders "she/her", `false` "he/him/his".
    Third(bool),
}

/// Renders a clause template. `{S}`, `{P}` and `{O}` are subject, possessive
/// and object pronouns; `[a/b]` picks `a` in first person, `b` otherwise.
pub fn render(template: &str, person: Person) -> String {
    let (s, p, o) = match person {
        Person::First => ("i", "my", "me"),
        Person::Third(true) => ("she", "her", "her"),
        Person::Third(false) => ("he", "his", "him"),
    };
    let mut out = String::with_capacity(template.len() + 8);
    let mut rest = template;
    while let Some(pos) = rest.find(['{', '[']) {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if let Some(r) = tail.strip_prefix("{S}") {
            out.push_str(s);
            rest = r;
        } else if let Some(r) = tail.strip_prefix("{P}") {
            out.push_str(p);
            rest = r;
        } else if let Some(r) = tail.strip_prefix("{O}") {
            out.push_str(o);
            rest = r;
        } else if tail.starts_with('[') && tail.contains(']') {
            let close = tail.find(']').expect("checked");
            let body = &tail[1..close];
            let (a, b) = body.split_once('/').unwrap_or((body, body));
            out.push_str(if person == Person::First { a } else { b });
            rest = &tail[close + 1..];
        } else {
            out.push_str(&tail[..1]);
            rest = &tail[1..];
        }
    }
    out.push_str(rest);
    out
}

fn symptom_material(id: &str) -> &'static SymptomMaterial {
    SYMPTOMS.iter().find(|s| s.id == id).expect("known symptom")
}

fn disease_material(id: &str) -> &'static DiseaseMaterial {
    DISEASES.iter().find(|d| d.id == id).expect("known disease")
}

/// Disease ids of the synthetic world, in graph order.
pub fn disease_ids() -> Vec<String> {
    DISEASES.iter().map(|d| d.id.to_string()).collect()
}

/// Symptom ids of the synthetic world, in graph order.
pub fn symptom_ids() -> Vec<String> {
    SYMPTOMS.iter().map(|s| s.id.to_string()).collect()
}

/// The synthetic knowledge graph. Sub-symptoms are the manual and
/// questionnaire phrasings plus the first few paraphrase clauses rendered in
/// first person as representative posts.
pub fn world_kg() -> KnowledgeGraph {
    let diseases = DISEASES
        .iter()
        .map(|d| Disease {
            id: d.id.into(),
            name: d.name.into(),
        })
        .collect();
    let symptoms = SYMPTOMS
        .iter()
        .map(|s| {
            let mut subs: Vec<SubSymptom> = Vec::new();
            let mut add = |text: String, source| subs.push(SubSymptom { text, source });
            for t in s.manual {
                add(t.to_string(), SubSymptomSource::Manual);
            }
            for t in s.questionnaire {
                add(t.to_string(), SubSymptomSource::Questionnaire);
            }
            for t in s.paraphrase_clauses.iter().take(s.post_examples) {
                add(render(t, Person::First), SubSymptomSource::Post);
            }
            Symptom {
                id: s.id.into(),
                name: s.name.into(),
                sub_symptoms: subs,
            }
        })
        .collect();
    let edges = DISEASES
        .iter()
        .flat_map(|d| d.symptoms.iter().map(move |s| (d.id.to_string(), s.to_string())));
    KnowledgeGraph::new(diseases, symptoms, edges).expect("synthetic graph is valid")
}

/// Clinical-term lexicon per symptom.
pub fn symptom_lexicons() -> BTreeMap<String, KeywordLexicon> {
    SYMPTOMS
        .iter()
        .map(|s| (s.id.to_string(), KeywordLexicon::new(s.keywords)))
        .collect()
}

/// Mental-health terms used to exclude control users.
pub fn mental_health_lexicon() -> KeywordLexicon {
    let terms = SYMPTOMS
        .iter()
        .flat_map(|s| s.keywords.iter())
        .chain(DISEASES.iter().flat_map(|d| d.diagnosis_keywords.iter()))
        .chain(["diagnosed", "therapist", "psychiatrist"].iter());
    KeywordLexicon::new(terms)
}

pub fn diagnosis_rule() -> DiagnosisRule {
    DiagnosisRule {
        diagnosis_patterns: vec!["diagnosed with".into(), "diagnosis of".into(), "i have been diagnosed".into()],
        disease_keywords: DISEASES
            .iter()
            .map(|d| (d.id.to_string(), d.diagnosis_keywords.iter().map(|k| k.to_string()).collect()))
            .collect(),
        window: 40,
    }
}

pub fn disease_subreddit(disease: &str) -> String {
    format!("{disease}_support")
}

pub const CONTROL_SUBREDDITS: [&str; 5] = ["cooking", "cycling", "movies", "gardening", "gaming"];

pub fn mental_health_subreddits() -> BTreeSet<String> {
    DISEASES.iter().map(|d| disease_subreddit(d.id)).collect()
}

fn maybe_filler(rng: &mut ChaCha8Rng, text: String, rate: f64) -> String {
    if rng.random_bool(rate) {
        let w = FILLER_WORDS.choose(rng).expect("non-empty");
        if rng.random_bool(0.5) {
            format!("{w} {text}")
        } else {
            format!("{text} {w}")
        }
    } else {
        text
    }
}

const CONNECTORS: [&str; 4] = ["after the", "because of the", "around the", "since the"];

fn with_context(rng: &mut ChaCha8Rng, text: String, disease: &DiseaseMaterial) -> String {
    let c = CONNECTORS.choose(rng).expect("non-empty");
    let w = disease.context_words.choose(rng).expect("non-empty");
    format!("{text} {c} {w}")
}

fn symptom_clause(rng: &mut ChaCha8Rng, symptom: &SymptomMaterial, paraphrase_rate: f64, person: Person) -> (String, bool) {
    let paraphrase = rng.random_bool(paraphrase_rate);
    let pool = if paraphrase {
        symptom.paraphrase_clauses
    } else {
        symptom.keyword_clauses
    };
    (render(pool.choose(rng).expect("non-empty"), person), paraphrase)
}

fn wrap_status(rng: &mut ChaCha8Rng, clause: &str, uncertain_rate: f64) -> (String, f64) {
    let (certain, uncertain): (Vec<_>, Vec<_>) = STATUS_WRAPPERS.iter().partition(|w| w.1 < 0.5);
    let pool = if rng.random_bool(uncertain_rate) { uncertain } else { certain };
    let (template, p) = pool.choose(rng).expect("non-empty");
    (template.replace("{C}", clause), *p)
}

// ---------------------------------------------------------------------------
// Relevance benchmark

fn shared_fragment(rng: &mut ChaCha8Rng, symptom: &str, rate: f64) -> Option<String> {
    let (_, fragments) = SHARED_FRAGMENTS.iter().find(|(members, _)| members.contains(&symptom))?;
    rng.random_bool(rate)
        .then(|| render(fragments.choose(rng).expect("non-empty"), Person::First))
}

/// Drops each word with probability `rate`, keeping at least two.
fn drop_words(rng: &mut ChaCha8Rng, text: &str, rate: f64) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    if rate <= 0.0 || words.len() <= 2 {
        return text.to_string();
    }
    let kept: Vec<&str> = words.iter().copied().filter(|_| !rng.random_bool(rate)).collect();
    if kept.len() >= 2 {
        kept.join(" ")
    } else {
        words[..2].join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSentence {
    pub id: String,
    pub text: String,
    /// Queue the sentence was annotated in; `None` for control sentences.
    pub disease: Option<String>,
    /// Every symptom the sentence is actually about.
    pub truth: BTreeSet<String>,
    /// Symptoms annotators judged (the queue's typical symptoms).
    pub observed: BTreeSet<String>,
    /// Annotated positives, after label noise.
    pub labeled: BTreeSet<String>,
    /// Chance that a single annotator calls the status uncertain.
    pub p_uncertain: f64,
}

impl BenchSentence {
    pub fn is_control(&self) -> bool {
        self.disease.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceBenchConfig {
    pub n_sentences: usize,
    pub control_fraction: f64,
    /// Share of symptom mentions drawn from outside the queue's typical set
    /// (these become missing labels).
    pub atypical_rate: f64,
    /// Share of annotated sentences with two symptoms.
    pub multi_rate: f64,
    /// Share of annotated sentences about no symptom.
    pub none_rate: f64,
    /// Probability of flipping an observed label.
    pub label_noise: f64,
    pub paraphrase_rate: f64,
    pub uncertain_rate: f64,
    /// Probability of dropping each word of a symptom clause.
    pub word_dropout: f64,
    /// Probability of appending an unrelated everyday clause.
    pub generic_mix: f64,
    /// Probability of appending a phrase shared with a symptom of another
    /// disease.
    pub shared_fragment_rate: f64,
    /// Probability that a sentence mentions a topic word of its queue's
    /// disease.
    pub context_rate: f64,
}

impl Default for RelevanceBenchConfig {
    fn default() -> Self {
        Self {
            n_sentences: 2000,
            control_fraction: 0.25,
            atypical_rate: 0.3,
            multi_rate: 0.2,
            none_rate: 0.2,
            label_noise: 0.02,
            paraphrase_rate: 0.6,
            uncertain_rate: 0.25,
            word_dropout: 0.3,
            generic_mix: 0.3,
            shared_fragment_rate: 0.5,
            context_rate: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceBenchmark {
    pub symptoms: Vec<String>,
    pub sentences: Vec<BenchSentence>,
}

pub fn relevance_benchmark(seed: u64, config: &RelevanceBenchConfig) -> RelevanceBenchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<&str> = SYMPTOMS.iter().map(|s| s.id).collect();
    let n_control = (config.n_sentences as f64 * config.control_fraction).round() as usize;
    let mut sentences = Vec::with_capacity(config.n_sentences);
    for i in 0..config.n_sentences {
        let id = sentence_id(&format!("b{i:05}"), 0);
        if i < n_control {
            let base = GENERIC_CLAUSES.choose(&mut rng).expect("non-empty").to_string();
            let text = maybe_filler(&mut rng, base, 0.5);
            sentences.push(BenchSentence {
                id,
                text,
                disease: None,
                truth: BTreeSet::new(),
                observed: all.iter().map(|s| s.to_string()).collect(),
                labeled: BTreeSet::new(),
                p_uncertain: 0.0,
            });
            continue;
        }
        let disease = DISEASES.choose(&mut rng).expect("non-empty");
        let atypical: Vec<&str> = all.iter().copied().filter(|s| !disease.symptoms.contains(s)).collect();
        let n_sym = if rng.random_bool(config.none_rate) {
            0
        } else if rng.random_bool(config.multi_rate) {
            2
        } else {
            1
        };
        let mut truth = BTreeSet::new();
        while truth.len() < n_sym {
            let pool: &[&str] = if rng.random_bool(config.atypical_rate) {
                &atypical
            } else {
                disease.symptoms
            };
            truth.insert(pool.choose(&mut rng).expect("non-empty").to_string());
        }
        let (text, p_uncertain) = if truth.is_empty() {
            let base = if rng.random_bool(0.3) {
                KEYWORD_DISTRACTORS.choose(&mut rng)
            } else {
                GENERIC_CLAUSES.choose(&mut rng)
            };
            (base.expect("non-empty").to_string(), 0.0)
        } else {
            let clauses: Vec<String> = truth
                .iter()
                .map(|s| {
                    let c = symptom_clause(&mut rng, symptom_material(s), config.paraphrase_rate, Person::First).0;
                    let c = drop_words(&mut rng, &c, config.word_dropout);
                    match shared_fragment(&mut rng, s, config.shared_fragment_rate) {
                        Some(f) => format!("{c} {f}"),
                        None => c,
                    }
                })
                .collect();
            wrap_status(&mut rng, &clauses.join(" and "), config.uncertain_rate)
        };
        let text = if rng.random_bool(config.context_rate) {
            with_context(&mut rng, text, disease)
        } else {
            text
        };
        let text = if rng.random_bool(config.generic_mix) {
            let g = GENERIC_CLAUSES.choose(&mut rng).expect("non-empty");
            format!("{text} and {g}")
        } else {
            text
        };
        let text = maybe_filler(&mut rng, text, 0.3);
        let observed: BTreeSet<String> = disease.symptoms.iter().map(|s| s.to_string()).collect();
        let labeled = observed
            .iter()
            .filter(|s| truth.contains(*s) != rng.random_bool(config.label_noise))
            .cloned()
            .collect();
        sentences.push(BenchSentence {
            id,
            text,
            disease: Some(disease.id.to_string()),
            truth,
            observed,
            labeled,
            p_uncertain,
        });
    }
    sentences.shuffle(&mut rng);
    RelevanceBenchmark {
        symptoms: all.iter().map(|s| s.to_string()).collect(),
        sentences,
    }
}

impl RelevanceBenchmark {
    pub fn texts(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.sentences[i].text.clone()).collect()
    }

    pub fn is_control(&self, idx: &[usize]) -> Vec<bool> {
        idx.iter().map(|&i| self.sentences[i].is_control()).collect()
    }

    /// Annotated view: observed symptoms carry their (noisy) label, the rest
    /// are missing.
    pub fn label_mask(&self, idx: &[usize]) -> LabelMask {
        let mut m = LabelMask::new(self.symptoms.clone());
        for &i in idx {
            let s = &self.sentences[i];
            m.rows.push(
                self.symptoms
                    .iter()
                    .map(|sym| {
                        if !s.observed.contains(sym) {
                            LabelState::Missing
                        } else if s.labeled.contains(sym) {
                            LabelState::Positive
                        } else {
                            LabelState::Negative
                        }
                    })
                    .collect(),
            );
        }
        m
    }

    /// Fully observed ground truth.
    pub fn truth_mask(&self, idx: &[usize]) -> LabelMask {
        let mut m = LabelMask::new(self.symptoms.clone());
        for &i in idx {
            let s = &self.sentences[i];
            m.rows.push(
                self.symptoms
                    .iter()
                    .map(|sym| {
                        if s.truth.contains(sym) {
                            LabelState::Positive
                        } else {
                            LabelState::Negative
                        }
                    })
                    .collect(),
            );
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Status benchmark

#[derive(Debug, Clone, PartialEq)]
pub struct StatusItem {
    pub id: String,
    pub text: String,
    /// Latent per-annotator probability of an Uncertain vote.
    pub p_uncertain: f64,
    /// Uncertain votes of the annotators.
    pub votes: Vec<bool>,
    /// Fraction of Uncertain votes.
    pub q: f64,
}

pub fn status_benchmark(seed: u64, n: usize, annotators: usize) -> Vec<StatusItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let symptom = SYMPTOMS.choose(&mut rng).expect("non-empty");
            let (clause, _) = symptom_clause(&mut rng, symptom, 0.5, Person::First);
            let (template, p) = STATUS_WRAPPERS.choose(&mut rng).expect("non-empty");
            let text = maybe_filler(&mut rng, template.replace("{C}", &clause), 0.3);
            let p_uncertain = (p + rng.random_range(-0.05..0.05)).clamp(0.0, 1.0);
            let votes: Vec<bool> = (0..annotators).map(|_| rng.random_bool(p_uncertain)).collect();
            let q = votes.iter().filter(|&&v| v).count() as f64 / annotators as f64;
            StatusItem {
                id: sentence_id(&format!("s{i:05}"), 0),
                text,
                p_uncertain,
                votes,
                q,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Retrieval corpus

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalCorpus {
    /// `(id, text)` in corpus order.
    pub sentences: Vec<(String, String)>,
    /// Planted sentence id -> symptom id.
    pub planted: BTreeMap<String, String>,
    /// Planted sentences that contain no lexicon keyword of any symptom.
    pub keyword_free: usize,
}

impl RetrievalCorpus {
    /// Gold relevance over every `(sentence, symptom)` pair.
    pub fn gold(&self) -> BTreeMap<(String, String), bool> {
        let mut out = BTreeMap::new();
        for (id, _) in &self.sentences {
            for s in SYMPTOMS {
                let rel = self.planted.get(id).is_some_and(|p| p == s.id);
                out.insert((id.clone(), s.id.to_string()), rel);
            }
        }
        out
    }
}

const PLANTED_DROPOUT: f64 = 0.15;

pub fn retrieval_corpus(seed: u64, n_planted: usize, n_distractors: usize, keyword_distractor_rate: f64) -> RetrievalCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicons = symptom_lexicons();
    let mut rows: Vec<(String, Option<String>)> = Vec::with_capacity(n_planted + n_distractors);
    for i in 0..n_planted {
        let symptom = &SYMPTOMS[i % SYMPTOMS.len()];
        let (clause, _) = symptom_clause(&mut rng, symptom, 0.6, Person::First);
        let clause = drop_words(&mut rng, &clause, PLANTED_DROPOUT);
        rows.push((maybe_filler(&mut rng, clause, 0.5), Some(symptom.id.to_string())));
    }
    for _ in 0..n_distractors {
        let base = if rng.random_bool(keyword_distractor_rate) {
            KEYWORD_DISTRACTORS.choose(&mut rng)
        } else {
            GENERIC_CLAUSES.choose(&mut rng)
        };
        rows.push((maybe_filler(&mut rng, base.expect("non-empty").to_string(), 0.6), None));
    }
    rows.shuffle(&mut rng);
    let mut sentences = Vec::with_capacity(rows.len());
    let mut planted = BTreeMap::new();
    let mut keyword_free = 0;
    for (i, (text, symptom)) in rows.into_iter().enumerate() {
        let id = sentence_id(&format!("r{i:05}"), 0);
        if let Some(s) = symptom {
            if !lexicons.values().any(|l| l.matches(&text)) {
                keyword_free += 1;
            }
            planted.insert(id.clone(), s);
        }
        sentences.push((id, text));
    }
    RetrievalCorpus {
        sentences,
        planted,
        keyword_free,
    }
}

// ---------------------------------------------------------------------------
// Users for disease detection

#[derive(Debug, Clone, PartialEq)]
pub struct MddWorldConfig {
    pub users_per_disease: usize,
    pub controls: usize,
    pub min_posts: usize,
    pub max_posts: usize,
    /// Share of a diagnosed user's posts describing their own symptoms.
    pub symptom_post_rate: f64,
    /// Share of controls who mostly write about someone else's condition.
    pub caregiver_rate: f64,
    /// Share of a caregiver's posts about the other person's symptoms.
    pub caregiver_post_rate: f64,
    /// Share of anyone's posts that are negated or hedged first-person
    /// symptom statements.
    pub hedged_post_rate: f64,
}

impl Default for MddWorldConfig {
    fn default() -> Self {
        Self {
            users_per_disease: 40,
            controls: 160,
            min_posts: 10,
            max_posts: 24,
            symptom_post_rate: 0.3,
            caregiver_rate: 0.5,
            caregiver_post_rate: 0.35,
            hedged_post_rate: 0.05,
        }
    }
}

const THIRD_PARTY_LEADS: [&str; 4] = ["", "apparently ", "a coworker says ", "the neighbor mentioned that "];

fn generic_post(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=2);
    let parts: Vec<String> = (0..n)
        .map(|_| {
            let base = GENERIC_CLAUSES.choose(rng).expect("non-empty").to_string();
            maybe_filler(rng, base, 0.3)
        })
        .collect();
    parts.join(". ") + "."
}

fn own_symptom_post(rng: &mut ChaCha8Rng, disease: &DiseaseMaterial) -> String {
    let s = symptom_material(disease.symptoms.choose(rng).expect("non-empty"));
    let (clause, _) = symptom_clause(rng, s, 0.6, Person::First);
    let (text, _) = wrap_status(rng, &clause, 0.1);
    let text = maybe_filler(rng, text, 0.3);
    if rng.random_bool(0.5) {
        format!("{text}. {}", generic_post(rng))
    } else {
        format!("{text}.")
    }
}

fn third_party_post(rng: &mut ChaCha8Rng, disease: &DiseaseMaterial) -> String {
    let s = symptom_material(disease.symptoms.choose(rng).expect("non-empty"));
    let person = Person::Third(rng.random_bool(0.5));
    let (clause, _) = symptom_clause(rng, s, 0.6, person);
    let lead = THIRD_PARTY_LEADS.choose(rng).expect("non-empty");
    format!("{lead}{clause}.")
}

fn hedged_post(rng: &mut ChaCha8Rng) -> String {
    let s = SYMPTOMS.choose(rng).expect("non-empty");
    let (clause, _) = symptom_clause(rng, s, 0.6, Person::First);
    let (text, _) = wrap_status(rng, &clause, 1.0);
    format!("{text}.")
}

fn user_posts(rng: &mut ChaCha8Rng, config: &MddWorldConfig, mut pick: impl FnMut(&mut ChaCha8Rng) -> Option<String>) -> Vec<UserPost> {
    let n = rng.random_range(config.min_posts..=config.max_posts);
    let mut t = rng.random_range(1_500_000_000i64..1_600_000_000);
    (0..n)
        .map(|_| {
            t += rng.random_range(3_600..400_000);
            let text = if rng.random_bool(config.hedged_post_rate) {
                hedged_post(rng)
            } else {
                pick(rng).unwrap_or_else(|| generic_post(rng))
            };
            UserPost { created_utc: t, text }
        })
        .collect()
}

/// Diagnosed users (one disease each) followed by control users. Half of the
/// controls (by default) are caregivers writing about another person's
/// symptoms in the third person.
pub fn mdd_users(seed: u64, config: &MddWorldConfig) -> Vec<UserHistory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut users = Vec::new();
    for d in DISEASES {
        for k in 0..config.users_per_disease {
            let rate = config.symptom_post_rate;
            let posts = user_posts(&mut rng, config, |r| r.random_bool(rate).then(|| own_symptom_post(r, d)));
            let label = DISEASES.iter().map(|x| (x.id.to_string(), x.id == d.id)).collect();
            users.push(UserHistory {
                user_id: format!("{}_{k:03}", d.id),
                label,
                posts,
            });
        }
    }
    for k in 0..config.controls {
        let caregiver = rng.random_bool(config.caregiver_rate);
        let other = DISEASES.choose(&mut rng).expect("non-empty");
        let rate = if caregiver { config.caregiver_post_rate } else { 0.0 };
        let posts = user_posts(&mut rng, config, |r| r.random_bool(rate).then(|| third_party_post(r, other)));
        users.push(UserHistory {
            user_id: format!("control_{k:03}"),
            label: DISEASES.iter().map(|x| (x.id.to_string(), false)).collect(),
            posts,
        });
    }
    users
}

// ---------------------------------------------------------------------------
// Raw posts and annotations for the command-line fixtures

/// Raw posts of the users, with a diagnosis statement added to each
/// diagnosed user's history. Symptom posts go to the disease forum, the rest
/// to hobby forums.
pub fn raw_posts(seed: u64, users: &[UserHistory]) -> Vec<RawPost> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon = mental_health_lexicon();
    let mut posts = Vec::new();
    for u in users {
        let disease = u.label.iter().find(|(_, &v)| v).map(|(d, _)| d.clone());
        if let Some(d) = &disease {
            let kw = disease_material(d).diagnosis_keywords.choose(&mut rng).expect("non-empty");
            posts.push(RawPost {
                id: format!("{}_dx", u.user_id),
                author: u.user_id.clone(),
                subreddit: disease_subreddit(d),
                created: u.posts.first().map_or(0, |p| p.created_utc - 100),
                text: format!("i was diagnosed with {kw} last year and things are [slowly](https://example.org) changing."),
            });
        }
        for (k, p) in u.posts.iter().enumerate() {
            let subreddit = match &disease {
                Some(d) if lexicon.matches(&p.text) => disease_subreddit(d),
                _ => CONTROL_SUBREDDITS.choose(&mut rng).expect("non-empty").to_string(),
            };
            posts.push(RawPost {
                id: format!("{}_{k:03}", u.user_id),
                author: u.user_id.clone(),
                subreddit,
                created: p.created_utc,
                text: p.text.clone(),
            });
        }
    }
    posts
}

/// Row-per-symptom annotation TSV for the annotated (non-control) benchmark
/// sentences: each annotator judges the queue's typical symptoms with
/// `flip_rate` noise, and votes Uncertain with the sentence's latent rate.
pub fn annotation_rows(seed: u64, bench: &RelevanceBenchmark, annotators: usize, flip_rate: f64) -> String {
    use std::fmt::Write as _;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for s in bench.sentences.iter().filter(|s| !s.is_control()) {
        for a in 0..annotators {
            let marks: Vec<(&String, bool)> = s
                .observed
                .iter()
                .map(|sym| (sym, s.truth.contains(sym) != rng.random_bool(flip_rate)))
                .collect();
            let status = if rng.random_bool(s.p_uncertain) { "U" } else { "T" };
            for (sym, rel) in marks {
                let st = if rel { status } else { "" };
                writeln!(out, "{}\tann{a}\t{sym}\t{}\t{st}", s.id, u8::from(rel)).expect("string write");
            }
        }
    }
    out
}
