use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Run record of one stage. Paths are relative to the config directory or the
/// output directory, so reruns in other locations compare equal.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub stage: String,
    pub version: &'static str,
    pub seed: u64,
    pub config_digest: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub inputs_digest: String,
}

/// Tracks a stage's inputs and outputs while it runs.
pub struct Stage {
    pub name: &'static str,
    out_dir: PathBuf,
    roots: Vec<PathBuf>,
    seed: u64,
    config_digest: String,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Stage {
    pub fn new(name: &'static str, out_dir: &Path, roots: Vec<PathBuf>, seed: u64, config_digest: String) -> Result<Self> {
        std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
        Ok(Self {
            name,
            out_dir: out_dir.to_path_buf(),
            roots,
            seed,
            config_digest,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        })
    }

    pub fn out(&self, file: &str) -> PathBuf {
        self.out_dir.join(file)
    }

    fn label(&self, path: &Path) -> String {
        for root in self.roots.iter().chain(std::iter::once(&self.out_dir)) {
            if let Ok(rel) = path.strip_prefix(root) {
                return rel.to_string_lossy().replace('\\', "/");
            }
        }
        path.to_string_lossy().into_owned()
    }

    /// Reads a declared input, recording its digest.
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).with_context(|| format!("missing input {}", path.display()))?;
        self.inputs.insert(self.label(path), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    /// Records an input read through a library loader.
    pub fn note_input(&mut self, path: &Path) -> Result<()> {
        self.read(path).map(drop)
    }

    pub fn write(&mut self, file: &str, contents: &str) -> Result<PathBuf> {
        self.write_path(self.out(file), contents)
    }

    /// Writes an output at an explicit location.
    pub fn write_path(&mut self, path: PathBuf, contents: &str) -> Result<PathBuf> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.insert(self.label(&path), sha256_hex(contents.as_bytes()));
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(file, &text)
    }

    pub fn finish(mut self) -> Result<Manifest> {
        let joined: String = self.inputs.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect();
        let manifest = Manifest {
            stage: self.name.to_string(),
            version: VERSION,
            seed: self.seed,
            config_digest: self.config_digest.clone(),
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
            inputs_digest: sha256_hex(joined.as_bytes()),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.out(&format!("manifests/{}.json", self.name));
        std::fs::create_dir_all(path.parent().expect("manifest dir"))?;
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(manifest)
    }
}
