//! Pipeline configuration: surfaces, task definitions and trials.
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use snapforge::analysis::{Task, DEFAULT_LEVEL, DEFAULT_RESAMPLES};
use snapforge::brushing::BandSpec;
use snapforge::surfacegen::ValueScale;
use snapforge::Mode;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub n_resamples: usize,
    pub level: f64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            n_resamples: DEFAULT_RESAMPLES,
            level: DEFAULT_LEVEL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDef {
    pub mesh: PathBuf,
    pub sdf: PathBuf,
    /// ForceParams JSON; defaults are fitted to the mesh and field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PathBuf>,
}

/// How the answer of a localization task is read off the selected point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// Elevation above the mesh's lowest point, scaled onto `display`.
    Protrusion { display: [f64; 2] },
    /// Distance from `center`, scaled.
    Depression { center: [f64; 3], scale: ValueScale },
    /// Value of a scalar texture at the point's UV.
    Texture { texture: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskDef {
    pub task: Task,
    pub surface: String,
    /// Curve tasks: the band the brushed curve is scored against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<BandSpec>,
    /// Localization tasks: how to read the answer, and the right answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialDef {
    pub id: String,
    pub participant: String,
    pub mode: Mode,
    /// Key into the config's `tasks`.
    pub task: String,
    pub trial: usize,
    pub script: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Seed of the bootstrap in the report stage.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub bootstrap: BootstrapSettings,
    pub surfaces: BTreeMap<String, SurfaceDef>,
    pub tasks: BTreeMap<String, TaskDef>,
    pub trials: Vec<TrialDef>,
    #[serde(skip)]
    pub base: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::from(e).context(path.display()))?;
        let mut config: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::from(e).context(path.display()))?;
        config.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.validate()?;
        Ok(config)
    }

    /// Resolves a config-relative path.
    pub fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn task(&self, trial: &TrialDef) -> &TaskDef {
        &self.tasks[&trial.task]
    }

    /// Structural checks, then existence of every referenced file.
    pub fn validate(&self) -> Result<()> {
        for (name, t) in &self.tasks {
            if !self.surfaces.contains_key(&t.surface) {
                return Err(CliError::bad_args(format!(
                    "task {name}: unknown surface {:?}",
                    t.surface
                )));
            }
            if let Some(band) = &t.band {
                band.validate()
                    .map_err(|e| CliError::from(e).context(format!("task {name}")))?;
            }
            match (&t.target, t.truth) {
                (Some(_), None) => {
                    return Err(CliError::bad_args(format!(
                        "task {name}: target without truth value"
                    )))
                }
                (Some(_), Some(0.0)) => {
                    return Err(CliError::bad_args(format!(
                        "task {name}: truth value must be non-zero"
                    )))
                }
                _ => {}
            }
        }
        let mut ids = BTreeSet::new();
        for trial in &self.trials {
            let safe = !trial.id.is_empty()
                && trial
                    .id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
            if !safe || trial.id.starts_with('.') {
                return Err(CliError::bad_args(format!(
                    "trial id {:?} must use only letters, digits, '-', '_' and '.'",
                    trial.id
                )));
            }
            if !ids.insert(&trial.id) {
                return Err(CliError::bad_args(format!("duplicate trial id {:?}", trial.id)));
            }
            if !self.tasks.contains_key(&trial.task) {
                return Err(CliError::bad_args(format!(
                    "trial {}: unknown task {:?}",
                    trial.id, trial.task
                )));
            }
        }
        for path in self.referenced_files() {
            if !path.exists() {
                return Err(CliError::missing(&path));
            }
        }
        Ok(())
    }

    /// Every input file the config points at.
    pub fn referenced_files(&self) -> Vec<PathBuf> {
        let mut out = Vec::new();
        for s in self.surfaces.values() {
            out.push(self.path(&s.mesh));
            out.push(self.path(&s.sdf));
            if let Some(p) = &s.params {
                out.push(self.path(p));
            }
        }
        for t in self.tasks.values() {
            if let Some(Target::Texture { texture }) = &t.target {
                out.push(self.path(texture));
            }
        }
        out.extend(self.trials.iter().map(|t| self.path(&t.script)));
        out
    }
}
