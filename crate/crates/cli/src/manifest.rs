//! Run manifest: config echo, seed, timestamps and a hashed file inventory.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use equimap::FlowConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the run directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    /// `config` or `env` (EQUIMAP_SEED).
    pub seed_source: String,
    pub config: FlowConfig,
    pub started: String,
    pub finished: String,
    pub aborted: Option<String>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn file_entry(dir: &Path, name: &str) -> anyhow::Result<FileEntry> {
    let p = dir.join(name);
    let bytes = fs::metadata(&p).with_context(|| format!("stat {}", p.display()))?.len();
    Ok(FileEntry { path: name.to_string(), bytes, sha256: sha256_file(&p)? })
}

pub fn read(dir: &Path) -> anyhow::Result<RunManifest> {
    let text = fs::read_to_string(dir.join(MANIFEST_NAME))?;
    Ok(serde_json::from_str(&text)?)
}

/// Checks that every listed file exists with the recorded size and hash.
pub fn verify(dir: &Path) -> anyhow::Result<RunManifest> {
    let m = read(dir)?;
    for f in &m.files {
        let e = file_entry(dir, &f.path)?;
        if e != *f {
            bail!("{} does not match the manifest", f.path);
        }
    }
    Ok(m)
}
