//! Provenance records written next to every artifact.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const TOOL: &str = "snapforge";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Enough to re-run the producing command: the exact arguments, the working
/// directory they are relative to, and digests of what went in and came out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub cwd: String,
    pub seed: Option<u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::from(e).context(path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// `out.ext` → `out.ext.manifest.json`.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Invocation context shared by all commands.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub argv: Vec<String>,
    pub cwd: PathBuf,
}

impl Invocation {
    pub fn current() -> Self {
        Self {
            argv: std::env::args().skip(1).collect(),
            cwd: std::env::current_dir().unwrap_or_default(),
        }
    }
}

/// Collects input and output digests while a command runs.
#[derive(Debug)]
pub struct Recorder {
    command: String,
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Recorder {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            seed: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Writes `bytes` to `path` and records the digest.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::from(e).context(dir.display()))?;
        }
        fs::write(path, bytes).map_err(|e| CliError::from(e).context(path.display()))?;
        self.outputs
            .insert(path.display().to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Records a file some library call already wrote.
    pub fn output(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.outputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn outputs(&self) -> &BTreeMap<String, String> {
        &self.outputs
    }

    /// Writes the manifest to `path` and returns it.
    pub fn finish(self, inv: &Invocation, path: &Path) -> Result<Manifest> {
        let manifest = Manifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: self.command,
            argv: inv.argv.clone(),
            cwd: inv.cwd.display().to_string(),
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::from(e).context(path.display()))?;
        Ok(manifest)
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| CliError::from(e).context(path.display()))?;
    Ok(serde_json::from_str(&text)?)
}
