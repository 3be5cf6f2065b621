use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use psysym_core::classifier::{MaskMode, TrainConfig};
use psysym_core::explain::AuditThresholds;
use psysym_core::mdd::{MddConfig, MddVariant};
use psysym_core::retrieval::DedupParams;
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "PSYSYM_";

/// Input and output locations. Relative paths resolve against the directory
/// of the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Paths {
    pub kg: PathBuf,
    pub posts: PathBuf,
    /// Sub-symptom embedding store; written by `embed` when absent.
    pub embeddings: PathBuf,
    pub annotations: PathBuf,
    /// Text of every annotation-pool sentence, `id<TAB>text`.
    pub sentences: PathBuf,
    pub lexicons: PathBuf,
    pub diagnosis: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    pub global: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self { global: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedSection {
    pub dim: usize,
    pub seed: u64,
}

impl Default for EmbedSection {
    fn default() -> Self {
        Self { dim: 256, seed: 7 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalSection {
    pub capacity: usize,
    pub dedup: DedupParams,
    /// Forum each disease's candidates are drawn from; all posts when absent.
    pub subreddits: BTreeMap<String, String>,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        Self {
            capacity: psysym_core::retrieval::DEFAULT_CAPACITY,
            dedup: DedupParams::default(),
            subreddits: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct UsersSection {
    pub controls: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotationSection {
    /// Raters per sentence used for agreement.
    pub annotators: usize,
}

impl Default for AnnotationSection {
    fn default() -> Self {
        Self { annotators: 3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RelevanceSection {
    pub mode: String,
    pub early_stopping: bool,
    pub threshold: f64,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for RelevanceSection {
    fn default() -> Self {
        Self {
            mode: MaskMode::LabelEnhance.as_str().to_string(),
            early_stopping: true,
            threshold: 0.5,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StatusSection {
    pub early_stopping: bool,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for StatusSection {
    fn default() -> Self {
        Self {
            early_stopping: true,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MddSection {
    pub variant: String,
    pub reweighting: bool,
    /// Extra third-person patterns for the subject rule.
    pub subject_patterns: Vec<String>,
    #[serde(flatten)]
    pub train: MddConfig,
}

impl Default for MddSection {
    fn default() -> Self {
        Self {
            variant: "conv".to_string(),
            reweighting: true,
            subject_patterns: Vec::new(),
            train: MddConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSection {
    pub ratios: [u32; 3],
}

impl Default for SplitSection {
    fn default() -> Self {
        Self { ratios: [5, 1, 4] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainSection {
    pub threshold: f64,
    pub excerpt_chars: usize,
}

impl Default for ExplainSection {
    fn default() -> Self {
        Self {
            threshold: psysym_core::explain::PRESENCE_THRESHOLD,
            excerpt_chars: 80,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub paths: Paths,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub embed: EmbedSection,
    #[serde(default)]
    pub retrieval: RetrievalSection,
    #[serde(default)]
    pub users: UsersSection,
    #[serde(default)]
    pub annotations: AnnotationSection,
    #[serde(default)]
    pub relevance: RelevanceSection,
    #[serde(default)]
    pub status: StatusSection,
    #[serde(default)]
    pub mdd: MddSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub explain: ExplainSection,
    #[serde(default)]
    pub audit: AuditThresholds,
}

/// Parses an override value as a TOML literal, falling back to a bare string.
fn env_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `PSYSYM_<SECTION>_<KEY>=value` overrides. Nested tables are
/// addressed with double underscores, e.g. `PSYSYM_RETRIEVAL_DEDUP__BANDS`.
pub fn apply_env_overrides(table: &mut toml::Table, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
    let mut vars: Vec<(String, String)> = vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (key, raw) in vars {
        let rest = key[ENV_PREFIX.len()..].to_lowercase();
        let Some((section, field)) = rest.split_once('_') else {
            bail!("environment override {key} must name a section and a key");
        };
        let mut target = table
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let parts: Vec<&str> = field.split("__").collect();
        for part in &parts[..parts.len() - 1] {
            let t = target
                .as_table_mut()
                .with_context(|| format!("environment override {key}: `{section}` is not a table"))?;
            target = t
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        let t = target
            .as_table_mut()
            .with_context(|| format!("environment override {key}: parent is not a table"))?;
        t.insert(parts[parts.len() - 1].to_string(), env_value(&raw));
    }
    Ok(())
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base: &Path, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        apply_env_overrides(&mut table, env)?;
        let mut cfg: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .context("config does not match the pipeline schema")?;
        cfg.paths.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, std::env::vars())
    }

    pub fn validate(&self) -> Result<()> {
        if self.split.ratios.iter().any(|&r| r == 0) {
            bail!("split ratios must be positive");
        }
        if self.retrieval.capacity == 0 {
            bail!("retrieval capacity must be positive");
        }
        MaskMode::parse(&self.relevance.mode)?;
        MddVariant::parse(&self.mdd.variant)?;
        self.relevance.train.validate()?;
        self.status.train.validate()?;
        self.mdd.train.validate()?;
        Ok(())
    }

    /// Seeds every stage from the global seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seeds.global = seed;
        self
    }

    pub fn relevance_train(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seeds.global,
            ..self.relevance.train.clone()
        }
    }

    pub fn status_train(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seeds.global,
            ..self.status.train.clone()
        }
    }

    pub fn mdd_train(&self) -> MddConfig {
        MddConfig {
            seed: self.seeds.global,
            ..self.mdd.train.clone()
        }
    }
}

impl Paths {
    /// Every path except the output directory.
    pub fn inputs_mut(&mut self) -> [&mut PathBuf; 7] {
        [
            &mut self.kg,
            &mut self.posts,
            &mut self.embeddings,
            &mut self.annotations,
            &mut self.sentences,
            &mut self.lexicons,
            &mut self.diagnosis,
        ]
    }

    fn resolve(&mut self, base: &Path) {
        if self.output.is_relative() {
            self.output = base.join(&self.output);
        }
        for p in self.inputs_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}
