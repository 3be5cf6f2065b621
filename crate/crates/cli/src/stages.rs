use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use psysym_core::annotations::{self, AnnotationRecord, GoldLabel};
use psysym_core::classifier::{self as clf, LabelMask, MaskMode, RelevanceArtifact, StatusArtifact, TfidfConfig};
use psysym_core::corpus::{self, RawPost, Split, SplitAssignment};
use psysym_core::embed::{self, EmbeddingStore};
use psysym_core::explain::{self, ExplainOptions};
use psysym_core::mdd::{self, MddModel, MddVariant, PostFeatures, SubjectRule, UserHistory, UserPost};
use psysym_core::retrieval::{self, KeywordLexicon};
use psysym_core::{synth, KnowledgeGraph};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::PipelineConfig;
use crate::manifest::{sha256_hex, Stage};
use crate::Suite;

// ---------------------------------------------------------------------------
// Errors

/// Failure raised by the command layer itself.
#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn config(err: anyhow::Error) -> Self {
        Self {
            kind: "config",
            message: format!("{err:#}"),
        }
    }

    fn missing(what: &str, path: &Path) -> Self {
        Self {
            kind: "missing_input",
            message: format!("{what} not found at {}", path.display()),
        }
    }

    fn schema(message: impl Into<String>) -> Self {
        Self {
            kind: "schema",
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn core_kind(e: &psysym_core::Error) -> &'static str {
    use psysym_core::Error as E;
    match e {
        E::Io { .. } => "io",
        E::Parse { .. } => "schema",
        E::Validation(_) => "validation",
        E::UnknownId { .. } => "unknown_id",
        E::DimensionMismatch { .. } => "dimension_mismatch",
        E::MissingEmbedding(_) => "missing_embedding",
        E::InvalidArgument(_) => "invalid_argument",
        E::Divergence { .. } => "divergence",
        E::Insufficient(_) => "insufficient_data",
    }
}

/// One-line JSON error report for stderr.
pub fn error_json(stage: &str, err: &anyhow::Error) -> String {
    let kind = err
        .chain()
        .find_map(|e| {
            if let Some(c) = e.downcast_ref::<CliError>() {
                Some(c.kind)
            } else if let Some(c) = e.downcast_ref::<psysym_core::Error>() {
                Some(core_kind(c))
            } else if e.downcast_ref::<std::io::Error>().is_some() {
                Some("io")
            } else if e.downcast_ref::<serde_json::Error>().is_some() {
                Some("schema")
            } else {
                None
            }
        })
        .unwrap_or("error");
    json!({ "error": { "stage": stage, "kind": kind, "message": format!("{err:#}") } }).to_string()
}

fn require(what: &str, path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::missing(what, path).into())
    }
}

// ---------------------------------------------------------------------------
// Context and shared file formats

pub struct Ctx {
    pub cfg: PipelineConfig,
    base: PathBuf,
    digest: String,
}

impl Ctx {
    pub fn load(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self> {
        let mut cfg = PipelineConfig::load(path)?;
        if let Some(seed) = seed {
            cfg = cfg.with_seed(seed);
        }
        if let Some(out) = out {
            cfg.paths.output = out;
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let digest = config_digest(&cfg, &base)?;
        Ok(Self { cfg, base, digest })
    }

    fn seed(&self) -> u64 {
        self.cfg.seeds.global
    }

    fn stage(&self, name: &'static str) -> Result<Stage> {
        Stage::new(name, &self.cfg.paths.output, vec![self.base.clone()], self.seed(), self.digest.clone())
    }

    fn out(&self, file: &str) -> PathBuf {
        self.cfg.paths.output.join(file)
    }
}

/// Digest of the effective config with paths made relative to the config
/// directory. The output location is left out.
fn config_digest(cfg: &PipelineConfig, base: &Path) -> Result<String> {
    let mut c = cfg.clone();
    for p in c.paths.inputs_mut() {
        if let Ok(rel) = p.strip_prefix(base) {
            *p = rel.to_path_buf();
        }
    }
    c.paths.output = PathBuf::new();
    Ok(sha256_hex(serde_json::to_string(&c)?.as_bytes()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconFile {
    pub symptoms: BTreeMap<String, Vec<String>>,
    pub mental_health_terms: Vec<String>,
    pub mental_health_subreddits: BTreeSet<String>,
}

/// Per-post features of every user, with the symptom column order.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FeatureFile {
    symptoms: Vec<String>,
    reweighting: bool,
    users: BTreeMap<String, Vec<PostFeatures>>,
}

impl FeatureFile {
    fn sequences(&self) -> BTreeMap<String, Vec<Vec<f64>>> {
        self.users.iter().map(|(u, f)| (u.clone(), mdd::sequence(f))).collect()
    }
}

fn parse_sentences(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeSet::new();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| CliError::schema(format!("sentences line {}: expected `id<TAB>text`", i + 1)))?;
        if !seen.insert(id.to_string()) {
            return Err(CliError::schema(format!("duplicate sentence id `{id}`")).into());
        }
        rows.push((id.to_string(), body.to_string()));
    }
    Ok(rows)
}

fn sentences_tsv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    rows.into_iter()
        .map(|(id, text)| format!("{id}\t{}\n", text.replace(['\t', '\n'], " ")))
        .collect()
}

fn read_kg(stage: &mut Stage, path: &Path) -> Result<KnowledgeGraph> {
    require("knowledge graph", path)?;
    Ok(KnowledgeGraph::from_json_str(&stage.read(path)?)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(stage: &mut Stage, what: &str, path: &Path) -> Result<T> {
    require(what, path)?;
    let text = stage.read(path)?;
    serde_json::from_str(&text).with_context(|| format!("{what} at {} is malformed", path.display()))
}

fn read_users(stage: &mut Stage, path: &Path) -> Result<Vec<UserHistory>> {
    require("user histories (run label-users)", path)?;
    Ok(mdd::read_users(stage.read(path)?.as_bytes())?)
}

fn read_split(stage: &mut Stage, what: &str, path: &Path) -> Result<SplitAssignment> {
    require(what, path)?;
    Ok(SplitAssignment::from_tsv(&stage.read(path)?)?)
}

fn read_relevance(stage: &mut Stage, path: &Path) -> Result<RelevanceArtifact> {
    require("relevance model (run train-relevance)", path)?;
    stage.note_input(path)?;
    Ok(clf::load_relevance(path)?)
}

fn read_status(stage: &mut Stage, path: &Path) -> Result<StatusArtifact> {
    require("status model (run train-status)", path)?;
    stage.note_input(path)?;
    Ok(clf::load_status(path)?)
}

fn read_gold(stage: &mut Stage, path: &Path) -> Result<Vec<GoldLabel>> {
    require("gold labels (run merge-annotations)", path)?;
    Ok(annotations::gold_from_ndjson(&stage.read(path)?)?)
}

fn compact_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

// ---------------------------------------------------------------------------
// synth-fixtures

pub struct FixtureSizes {
    pub users_per_disease: usize,
    pub controls: usize,
    pub sentences: usize,
}

pub fn synth_fixtures(out: &Path, seed: u64, sizes: &FixtureSizes) -> Result<()> {
    let digest = sha256_hex(format!("{}/{}/{}", sizes.users_per_disease, sizes.controls, sizes.sentences).as_bytes());
    let mut stage = Stage::new("synth-fixtures", out, vec![out.to_path_buf()], seed, digest)?;
    let kg = synth::world_kg();
    stage.write("kg.json", &(kg.to_json_string() + "\n"))?;

    let world = synth::MddWorldConfig {
        users_per_disease: sizes.users_per_disease,
        controls: sizes.controls,
        ..Default::default()
    };
    let users = synth::mdd_users(seed, &world);
    let posts = synth::raw_posts(seed, &users);
    stage.write("posts.jsonl", &corpus::posts_to_ndjson(&posts))?;

    let bench = synth::relevance_benchmark(
        seed,
        &synth::RelevanceBenchConfig {
            n_sentences: sizes.sentences,
            ..Default::default()
        },
    );
    stage.write(
        "sentences.tsv",
        &sentences_tsv(bench.sentences.iter().map(|s| (s.id.as_str(), s.text.as_str()))),
    )?;
    stage.write("annotations.tsv", &synth::annotation_rows(seed, &bench, 3, 0.05))?;

    let mh_terms = synth::mental_health_lexicon();
    let lexicons = LexiconFile {
        symptoms: synth::symptom_lexicons()
            .into_iter()
            .map(|(s, l)| (s, l.terms().to_vec()))
            .collect(),
        mental_health_terms: mh_terms.terms().to_vec(),
        mental_health_subreddits: synth::mental_health_subreddits(),
    };
    stage.write_json("lexicons.json", &lexicons)?;
    stage.write_json("diagnosis.json", &synth::diagnosis_rule())?;

    let eligible = users
        .iter()
        .filter(|u| u.is_control() && u.posts.iter().all(|p| !mh_terms.matches(&p.text)))
        .count();
    let mut config = String::new();
    config.push_str(
        "[paths]\n\
         kg = \"kg.json\"\n\
         posts = \"posts.jsonl\"\n\
         embeddings = \"out/embeddings.tsv\"\n\
         annotations = \"annotations.tsv\"\n\
         sentences = \"sentences.tsv\"\n\
         lexicons = \"lexicons.json\"\n\
         diagnosis = \"diagnosis.json\"\n\
         output = \"out\"\n\n",
    );
    config.push_str(&format!("[seeds]\nglobal = {seed}\n\n[users]\ncontrols = {eligible}\n\n"));
    config.push_str("[retrieval.subreddits]\n");
    for d in synth::disease_ids() {
        config.push_str(&format!("{d} = \"{}\"\n", synth::disease_subreddit(&d)));
    }
    stage.write("config.toml", &config)?;
    stage.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Knowledge graph, embeddings, retrieval

pub fn validate_kg(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("validate-kg")?;
    let kg = read_kg(&mut stage, &ctx.cfg.paths.kg)?;
    let degrees = kg.sharing_degrees();
    let shared = degrees.values().filter(|&&d| d >= 2).count();
    let typical: BTreeMap<String, Vec<String>> = kg
        .diseases()
        .iter()
        .map(|d| Ok((d.id.clone(), kg.typical_symptom_ids(&d.id)?.into_iter().collect())))
        .collect::<Result<_>>()?;
    let report = json!({
        "diseases": kg.diseases().len(),
        "symptoms": kg.symptoms().len(),
        "edges": kg.edges().len(),
        "sub_symptoms": kg.symptoms().iter().map(|s| s.sub_symptoms.len()).sum::<usize>(),
        "shared_symptoms": shared,
        "shared_fraction": shared as f64 / kg.symptoms().len().max(1) as f64,
        "sharing_degrees": degrees,
        "typical_symptoms": typical,
    });
    stage.write_json("kg_report.json", &report)?;
    stage.finish()?;
    Ok(())
}

pub fn embed(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("embed")?;
    let kg = read_kg(&mut stage, &ctx.cfg.paths.kg)?;
    let store = embed::embed_sub_symptoms(&kg, ctx.cfg.embed.dim, ctx.cfg.embed.seed)?;
    stage.write_path(ctx.cfg.paths.embeddings.clone(), &store.to_tsv())?;
    stage.finish()?;
    Ok(())
}

fn disease_sentences(ctx: &Ctx, posts: &[RawPost], disease: &str) -> Vec<(String, String)> {
    let forum = ctx.cfg.retrieval.subreddits.get(disease).map(|s| s.to_lowercase());
    posts
        .iter()
        .filter(|p| forum.as_ref().is_none_or(|f| p.subreddit.to_lowercase() == *f))
        .flat_map(|p| corpus::split_sentences(&corpus::clean_post(p)))
        .map(|s| (s.id(), s.text))
        .collect()
}

pub fn retrieve(ctx: &Ctx, disease: &str) -> Result<()> {
    let mut stage = ctx.stage("retrieve")?;
    let kg = read_kg(&mut stage, &ctx.cfg.paths.kg)?;
    kg.disease(disease)?;
    require("posts", &ctx.cfg.paths.posts)?;
    require("sub-symptom embeddings (run embed)", &ctx.cfg.paths.embeddings)?;
    let posts = corpus::read_posts(stage.read(&ctx.cfg.paths.posts)?.as_bytes())?;
    let store = EmbeddingStore::from_reader(stage.read(&ctx.cfg.paths.embeddings)?.as_bytes())?;
    if store.dim() != ctx.cfg.embed.dim {
        return Err(CliError::schema(format!(
            "embedding store has dimension {} but config asks for {}",
            store.dim(),
            ctx.cfg.embed.dim
        ))
        .into());
    }
    let sentences = disease_sentences(ctx, &posts, disease);
    let vectors: Vec<(String, Vec<f64>)> = sentences
        .iter()
        .map(|(id, text)| (id.clone(), embed::hash_embed(text, ctx.cfg.embed.dim, ctx.cfg.embed.seed)))
        .collect();
    let selection = retrieval::select_candidates(&vectors, &kg, disease, &store, ctx.cfg.retrieval.capacity)?;
    let text: HashMap<&str, &str> = sentences.iter().map(|(i, t)| (i.as_str(), t.as_str())).collect();
    let ids = selection.ids();
    stage.write(&format!("candidates/{disease}.tsv"), &selection.to_tsv())?;
    stage.write(
        &format!("candidates/{disease}_sentences.tsv"),
        &sentences_tsv(ids.iter().map(|id| (id.as_str(), text[id.as_str()]))),
    )?;
    let queues: BTreeMap<&str, serde_json::Value> = selection
        .queues
        .iter()
        .map(|q| (q.symptom(), json!({ "size": q.len(), "min_score": q.min_score() })))
        .collect();
    stage.write_json(
        &format!("candidates/{disease}_summary.json"),
        &json!({ "disease": disease, "pool": sentences.len(), "selected": ids.len(), "queues": queues }),
    )?;
    stage.finish()?;
    Ok(())
}

pub fn dedup(ctx: &Ctx, disease: &str) -> Result<()> {
    let mut stage = ctx.stage("dedup")?;
    let path = ctx.out(&format!("candidates/{disease}_sentences.tsv"));
    require("candidate sentences (run retrieve)", &path)?;
    let candidates = parse_sentences(&stage.read(&path)?)?;
    let kept = retrieval::lsh_dedup(&candidates, &ctx.cfg.retrieval.dedup)?;
    let text: HashMap<&str, &str> = candidates.iter().map(|(i, t)| (i.as_str(), t.as_str())).collect();
    stage.write(
        &format!("candidates/{disease}_dedup.tsv"),
        &sentences_tsv(kept.iter().map(|id| (id.as_str(), text[id.as_str()]))),
    )?;
    stage.write_json(
        &format!("candidates/{disease}_dedup_summary.json"),
        &json!({ "disease": disease, "before": candidates.len(), "after": kept.len() }),
    )?;
    stage.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Users and annotations

pub fn label_users(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("label-users")?;
    let paths = &ctx.cfg.paths;
    let kg = read_kg(&mut stage, &paths.kg)?;
    require("posts", &paths.posts)?;
    let posts = corpus::read_posts(stage.read(&paths.posts)?.as_bytes())?;
    let rule: corpus::DiagnosisRule = read_json(&mut stage, "diagnosis rule", &paths.diagnosis)?;
    rule.validate(&kg)?;
    let lexicons: LexiconFile = read_json(&mut stage, "lexicons", &paths.lexicons)?;

    let labels = corpus::label_diagnosed_users(&posts, &rule);
    let mh_terms = KeywordLexicon::new(&lexicons.mental_health_terms);
    let controls = corpus::sample_control_users(
        &posts,
        &lexicons.mental_health_subreddits,
        &mh_terms,
        ctx.cfg.users.controls,
        ctx.seed(),
    )?;

    let kept = corpus::filter_diagnostic_posts(&posts, &labels.diagnostic_posts);
    let mut by_author: BTreeMap<&str, Vec<UserPost>> = BTreeMap::new();
    for p in &kept {
        by_author.entry(&p.author).or_default().push(UserPost {
            created_utc: p.created,
            text: p.text.clone(),
        });
    }
    let selected: BTreeSet<&str> = labels.users.keys().map(String::as_str).chain(controls.iter().map(String::as_str)).collect();
    let mut users = Vec::new();
    for id in selected {
        let diagnosed = labels.users.get(id);
        let label = kg
            .diseases()
            .iter()
            .map(|d| (d.id.clone(), diagnosed.is_some_and(|s| s.contains(&d.id))))
            .collect();
        let mut user = UserHistory {
            user_id: id.to_string(),
            label,
            posts: by_author.remove(id).unwrap_or_default(),
        };
        user.normalize();
        users.push(user);
    }

    let mut per_disease: BTreeMap<String, usize> = kg.diseases().iter().map(|d| (d.id.clone(), 0)).collect();
    for set in labels.users.values() {
        for d in set {
            *per_disease.entry(d.clone()).or_default() += 1;
        }
    }
    stage.write("users.jsonl", &mdd::users_to_ndjson(&users))?;
    stage.write_json(
        "users_summary.json",
        &json!({
            "diagnosed": per_disease,
            "controls": controls.len(),
            "diagnostic_posts_removed": labels.diagnostic_posts.len(),
            "users": users.len(),
        }),
    )?;
    stage.finish()?;
    Ok(())
}

fn annotator_quality(records: &[AnnotationRecord], gold: &[GoldLabel]) -> Result<BTreeMap<String, serde_json::Value>> {
    let reference: HashMap<&str, &GoldLabel> = gold.iter().map(|g| (g.sentence_id.as_str(), g)).collect();
    let mut marks: BTreeMap<&str, (BTreeMap<(String, String), bool>, BTreeMap<(String, String), bool>)> =
        BTreeMap::new();
    for r in records {
        let g = reference[r.sentence_id.as_str()];
        let (cand, refm) = marks.entry(&r.annotator_id).or_default();
        for (sym, &v) in &r.relevance {
            let key = (r.sentence_id.clone(), sym.clone());
            cand.insert(key.clone(), v);
            refm.insert(key, g.relevant.contains(sym));
        }
    }
    marks
        .into_iter()
        .map(|(a, (cand, refm))| {
            let q = annotations::quality_score(&cand, &refm, 2.0)?;
            Ok((
                a.to_string(),
                json!({ "f2": q.f_beta, "qualifies": q.qualifies(), "rejects_batch": q.rejects_batch() }),
            ))
        })
        .collect()
}

pub fn merge_annotations(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("merge-annotations")?;
    let kg = read_kg(&mut stage, &ctx.cfg.paths.kg)?;
    require("annotations", &ctx.cfg.paths.annotations)?;
    let records = annotations::parse_annotation_tsv(&stage.read(&ctx.cfg.paths.annotations)?)?;
    let gold = annotations::merge_all(&records)?;
    for g in &gold {
        annotations::validate_gold(g, &kg)?;
    }
    let agreement = annotations::agreement(&records, ctx.cfg.annotations.annotators)?;
    let quality = annotator_quality(&records, &gold)?;
    stage.write("gold.jsonl", &annotations::gold_to_ndjson(&gold))?;
    stage.write_json("agreement.json", &agreement)?;
    stage.write_json("annotators.json", &quality)?;
    stage.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Training

struct RelevanceRows {
    ids: Vec<String>,
    texts: Vec<String>,
    gold: Vec<Option<GoldLabel>>,
}

impl RelevanceRows {
    /// Gold-labelled sentences are annotated rows; every other sentence is a
    /// control row, negative for all symptoms.
    fn load(stage: &mut Stage, ctx: &Ctx) -> Result<Self> {
        require("sentences", &ctx.cfg.paths.sentences)?;
        let sentences = parse_sentences(&stage.read(&ctx.cfg.paths.sentences)?)?;
        let gold = read_gold(stage, &ctx.out("gold.jsonl"))?;
        let mut by_id: HashMap<String, GoldLabel> = gold.into_iter().map(|g| (g.sentence_id.clone(), g)).collect();
        let mut rows = Self {
            ids: Vec::new(),
            texts: Vec::new(),
            gold: Vec::new(),
        };
        for (id, text) in sentences {
            rows.gold.push(by_id.remove(&id));
            rows.ids.push(id);
            rows.texts.push(text);
        }
        if let Some(orphan) = by_id.keys().min() {
            return Err(CliError::schema(format!("gold label `{orphan}` has no sentence text")).into());
        }
        Ok(rows)
    }

    fn strata(&self) -> HashMap<String, String> {
        self.ids
            .iter()
            .zip(&self.gold)
            .map(|(id, g)| (id.clone(), if g.is_some() { "annotated" } else { "control" }.to_string()))
            .collect()
    }

    fn select(&self, split: &SplitAssignment, which: Split, symptoms: &[String]) -> Result<(Vec<String>, LabelMask, Vec<bool>)> {
        let mut texts = Vec::new();
        let mut mask = LabelMask::new(symptoms.to_vec());
        let mut control = Vec::new();
        for (i, id) in self.ids.iter().enumerate() {
            if split.get(id) != Some(which) {
                continue;
            }
            texts.push(self.texts[i].clone());
            match &self.gold[i] {
                Some(g) => mask.push_gold(g)?,
                None => mask.push_control(),
            }
            control.push(self.gold[i].is_none());
        }
        Ok((texts, mask, control))
    }
}

pub fn train_relevance(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("train-relevance")?;
    let kg = read_kg(&mut stage, &ctx.cfg.paths.kg)?;
    let rows = RelevanceRows::load(&mut stage, ctx)?;
    let split = corpus::split_dataset(&rows.ids, ctx.cfg.split.ratios, ctx.seed(), Some(&rows.strata()))?;
    let symptoms = kg.symptom_ids();
    let (train_texts, train_mask, train_control) = rows.select(&split, Split::Train, &symptoms)?;
    let vectorizer = clf::fit_tfidf(&train_texts, &TfidfConfig::default())?;
    let data = clf::RelevanceData::new(vectorizer.transform_all(&train_texts), train_mask, train_control)?;
    let (val_texts, val_mask, _) = rows.select(&split, Split::Validation, &symptoms)?;
    let val_features = vectorizer.transform_all(&val_texts);
    let validation = (ctx.cfg.relevance.early_stopping && !val_texts.is_empty()).then_some((&val_features[..], &val_mask));
    let mode = MaskMode::parse(&ctx.cfg.relevance.mode)?;
    let (model, report) = clf::train_relevance(&data, &ctx.cfg.relevance_train(), mode, validation)?;
    let artifact = RelevanceArtifact::new(vectorizer, model);
    stage.write("relevance_model.json", &compact_json(&artifact)?)?;
    stage.write("relevance_split.tsv", &split.to_tsv())?;
    stage.write_json("relevance_report.json", &report)?;
    stage.finish()?;
    Ok(())
}

fn status_rows(stage: &mut Stage, ctx: &Ctx) -> Result<(Vec<String>, Vec<String>, Vec<f64>)> {
    let rows = RelevanceRows::load(stage, ctx)?;
    let mut out = (Vec::new(), Vec::new(), Vec::new());
    for ((id, text), g) in rows.ids.into_iter().zip(rows.texts).zip(rows.gold) {
        if let Some(g) = g.filter(GoldLabel::status_applicable) {
            out.0.push(id);
            out.1.push(text);
            out.2.push(g.status_q);
        }
    }
    if out.0.is_empty() {
        return Err(psysym_core::Error::Insufficient("no sentence has status votes".into()).into());
    }
    Ok(out)
}

fn pick<T: Clone>(ids: &[String], values: &[T], split: &SplitAssignment, which: Split) -> Vec<T> {
    ids.iter()
        .zip(values)
        .filter(|(id, _)| split.get(id) == Some(which))
        .map(|(_, v)| v.clone())
        .collect()
}

pub fn train_status(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("train-status")?;
    let (ids, texts, q) = status_rows(&mut stage, ctx)?;
    let split = corpus::split_dataset(&ids, ctx.cfg.split.ratios, ctx.seed(), None)?;
    let train_texts = pick(&ids, &texts, &split, Split::Train);
    let vectorizer = clf::fit_tfidf(&train_texts, &TfidfConfig::default())?;
    let train_x = vectorizer.transform_all(&train_texts);
    let val_x = vectorizer.transform_all(&pick(&ids, &texts, &split, Split::Validation));
    let val_q = pick(&ids, &q, &split, Split::Validation);
    let validation = (ctx.cfg.status.early_stopping && !val_q.is_empty()).then_some((&val_x[..], &val_q[..]));
    let model = clf::train_status(
        &train_x,
        &pick(&ids, &q, &split, Split::Train),
        &ctx.cfg.status_train(),
        validation,
    )?;
    stage.write("status_model.json", &compact_json(&StatusArtifact::new(vectorizer, model))?)?;
    stage.write("status_split.tsv", &split.to_tsv())?;
    stage.finish()?;
    Ok(())
}

fn user_stratum(u: &UserHistory) -> String {
    u.label
        .iter()
        .find(|(_, &v)| v)
        .map_or_else(|| "control".to_string(), |(d, _)| d.clone())
}

pub fn train_mdd(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("train-mdd")?;
    let kg = read_kg(&mut stage, &ctx.cfg.paths.kg)?;
    let users = read_users(&mut stage, &ctx.out("users.jsonl"))?;
    let relevance = read_relevance(&mut stage, &ctx.out("relevance_model.json"))?;
    let status = read_status(&mut stage, &ctx.out("status_model.json"))?;
    if users.is_empty() {
        return Err(psysym_core::Error::Insufficient("no users to train on".into()).into());
    }
    let subject = SubjectRule::new(&ctx.cfg.mdd.subject_patterns)?;
    let features = FeatureFile {
        symptoms: relevance.model.symptoms.clone(),
        reweighting: ctx.cfg.mdd.reweighting,
        users: mdd::extract_all(&users, &relevance, &status, &subject, ctx.cfg.mdd.reweighting)?,
    };
    let sequences = features.sequences();

    let ids: Vec<String> = users.iter().map(|u| u.user_id.clone()).collect();
    let strata: HashMap<String, String> = users.iter().map(|u| (u.user_id.clone(), user_stratum(u))).collect();
    let split = corpus::split_dataset(&ids, ctx.cfg.split.ratios, ctx.seed(), Some(&strata))?;
    let variant = MddVariant::parse(&ctx.cfg.mdd.variant)?;
    let config = ctx.cfg.mdd_train();

    let mut models: BTreeMap<String, MddModel> = BTreeMap::new();
    let mut reports = BTreeMap::new();
    let mut skipped = Vec::new();
    for d in kg.diseases() {
        let task = mdd::binary_task(&users, &d.id);
        let part = |which: Split| -> Vec<(Vec<Vec<f64>>, bool)> {
            task.iter()
                .filter(|(u, _)| split.get(&u.user_id) == Some(which))
                .map(|(u, y)| (sequences[&u.user_id].clone(), *y))
                .collect()
        };
        let train = part(Split::Train);
        if !train.iter().any(|r| r.1) {
            skipped.push(d.id.clone());
            continue;
        }
        let (model, report) = mdd::train_mdd(&train, &part(Split::Validation), &d.id, variant, &config)?;
        models.insert(d.id.clone(), model);
        reports.insert(d.id.clone(), report);
    }
    stage.write("features.json", &compact_json(&features)?)?;
    stage.write("user_split.tsv", &split.to_tsv())?;
    stage.write("mdd_models.json", &compact_json(&models)?)?;
    stage.write_json("mdd_report.json", &json!({ "diseases": reports, "skipped": skipped }))?;
    stage.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Evaluation

fn eval_relevance(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("evaluate-relevance")?;
    let artifact = read_relevance(&mut stage, &ctx.out("relevance_model.json"))?;
    let split = read_split(&mut stage, "relevance split", &ctx.out("relevance_split.tsv"))?;
    let rows = RelevanceRows::load(&mut stage, ctx)?;
    let (texts, mask, _) = rows.select(&split, Split::Test, &artifact.model.symptoms)?;
    let features = artifact.vectorizer.transform_all(&texts);
    let eval = clf::eval_relevance(&artifact.model, &features, &mask, ctx.cfg.relevance.threshold)?;
    stage.write_json(
        "metrics_relevance.json",
        &json!({ "mode": artifact.model.mode, "n_test": texts.len(), "metrics": eval }),
    )?;
    stage.finish()?;
    Ok(())
}

fn eval_status(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("evaluate-status")?;
    let artifact = read_status(&mut stage, &ctx.out("status_model.json"))?;
    let split = read_split(&mut stage, "status split", &ctx.out("status_split.tsv"))?;
    let (ids, texts, q) = status_rows(&mut stage, ctx)?;
    let features = artifact.vectorizer.transform_all(&pick(&ids, &texts, &split, Split::Test));
    let eval = clf::eval_status(&artifact.model, &features, &pick(&ids, &q, &split, Split::Test))?;
    stage.write_json("metrics_status.json", &eval)?;
    stage.finish()?;
    Ok(())
}

fn read_models(stage: &mut Stage, ctx: &Ctx) -> Result<BTreeMap<String, MddModel>> {
    read_json(stage, "disease models (run train-mdd)", &ctx.out("mdd_models.json"))
}

fn read_features(stage: &mut Stage, ctx: &Ctx) -> Result<FeatureFile> {
    read_json(stage, "post features (run train-mdd)", &ctx.out("features.json"))
}

fn eval_mdd(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("evaluate-mdd")?;
    let models = read_models(&mut stage, ctx)?;
    let features = read_features(&mut stage, ctx)?;
    let users = read_users(&mut stage, &ctx.out("users.jsonl"))?;
    let split = read_split(&mut stage, "user split", &ctx.out("user_split.tsv"))?;
    let test: Vec<UserHistory> = users
        .into_iter()
        .filter(|u| split.get(&u.user_id) == Some(Split::Test))
        .collect();
    let eval = mdd::eval_mdd(&models, &test, &features.sequences())?;
    stage.write_json("metrics_mdd.json", &json!({ "n_test": test.len(), "metrics": eval }))?;
    stage.finish()?;
    Ok(())
}

pub fn evaluate(ctx: &Ctx, suite: Suite) -> Result<()> {
    match suite {
        Suite::Relevance => eval_relevance(ctx),
        Suite::Status => eval_status(ctx),
        Suite::Mdd => eval_mdd(ctx),
        Suite::All => {
            eval_relevance(ctx)?;
            eval_status(ctx)?;
            eval_mdd(ctx)
        }
    }
}

// ---------------------------------------------------------------------------
// Explanations and audits

pub fn explain(ctx: &Ctx, user: Option<&str>, disease: Option<&str>) -> Result<()> {
    let mut stage = ctx.stage("explain")?;
    let kg = read_kg(&mut stage, &ctx.cfg.paths.kg)?;
    let users = read_users(&mut stage, &ctx.out("users.jsonl"))?;
    let features = read_features(&mut stage, ctx)?;
    if let Some(d) = disease {
        kg.disease(d)?;
    }

    let mut targets: Vec<(&UserHistory, String)> = Vec::new();
    match user {
        Some(id) => {
            let u = users.iter().find(|u| u.user_id == id).ok_or_else(|| psysym_core::Error::UnknownId {
                kind: "user",
                id: id.to_string(),
            })?;
            let diseases: Vec<String> = match disease {
                Some(d) => vec![d.to_string()],
                None if u.is_control() => kg.diseases().iter().map(|d| d.id.clone()).collect(),
                None => u.label.iter().filter(|(_, &v)| v).map(|(d, _)| d.clone()).collect(),
            };
            targets.extend(diseases.into_iter().map(|d| (u, d)));
        }
        None => {
            let split = read_split(&mut stage, "user split", &ctx.out("user_split.tsv"))?;
            for u in users.iter().filter(|u| split.get(&u.user_id) == Some(Split::Test)) {
                for (d, _) in u.label.iter().filter(|(_, &v)| v) {
                    if disease.is_none_or(|x| x == d) {
                        targets.push((u, d.clone()));
                    }
                }
            }
        }
    }

    let options = ExplainOptions {
        threshold: ctx.cfg.explain.threshold,
        excerpt_chars: ctx.cfg.explain.excerpt_chars,
        redact: None,
    };
    let mut text = String::new();
    let mut jsonl = String::new();
    for (u, d) in targets {
        let f = features.users.get(&u.user_id).ok_or_else(|| psysym_core::Error::UnknownId {
            kind: "user features",
            id: u.user_id.clone(),
        })?;
        let expl = explain::explain_user(u, f, &d, &kg, &features.symptoms, &options)?;
        if !explain::verify_explanation(&expl, f, &features.symptoms, options.threshold) {
            return Err(psysym_core::Error::Validation(format!("explanation for {} cites unsupported posts", u.user_id)).into());
        }
        if !text.is_empty() {
            text.push('\n');
        }
        text.push_str(&expl.to_text());
        jsonl.push_str(&compact_json(&expl)?);
    }
    stage.write("explanations.txt", &text)?;
    stage.write("explanations.jsonl", &jsonl)?;
    stage.finish()?;
    Ok(())
}

pub fn audit(ctx: &Ctx) -> Result<()> {
    let mut stage = ctx.stage("audit")?;
    let kg = read_kg(&mut stage, &ctx.cfg.paths.kg)?;
    let users = read_users(&mut stage, &ctx.out("users.jsonl"))?;
    let features = read_features(&mut stage, ctx)?;
    let models = read_models(&mut stage, ctx)?;
    let mut jsonl = String::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for u in &users {
        let empty = Vec::new();
        let f = features.users.get(&u.user_id).unwrap_or(&empty);
        for flag in explain::audit_labels(u, f, &kg, &features.symptoms, &models, &ctx.cfg.audit)? {
            *counts.entry(serde_json::to_value(flag.kind)?.as_str().unwrap_or_default().to_string()).or_default() += 1;
            jsonl.push_str(&compact_json(&flag)?);
        }
    }
    stage.write("audit.jsonl", &jsonl)?;
    stage.write_json("audit_summary.json", &json!({ "users": users.len(), "flags": counts }))?;
    stage.finish()?;
    Ok(())
}
