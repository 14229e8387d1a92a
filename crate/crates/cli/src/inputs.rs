//! Loading of input artifacts with exit-code aware errors.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use snapforge::brushing::Mask;
use snapforge::distfield::{read_field, DistanceField, SurfaceIndex};
use snapforge::pgm;
use snapforge::surfacegen::{load_mesh, ScalarTexture, TriMesh};
use snapforge::{ForceParams, TrajectoryScript, TrialLog};

use crate::error::{CliError, Context, Result};

fn open(path: &Path) -> Result<BufReader<File>> {
    if !path.exists() {
        return Err(CliError::missing(path));
    }
    File::open(path)
        .map(BufReader::new)
        .context(path.display())
}

pub fn mesh(path: &Path) -> Result<TriMesh> {
    if !path.exists() {
        return Err(CliError::missing(path));
    }
    let loaded = load_mesh(path).context(path.display())?;
    for w in &loaded.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(loaded.mesh)
}

pub fn field(path: &Path) -> Result<DistanceField> {
    read_field(open(path)?).context(path.display())
}

pub fn params(path: &Path) -> Result<ForceParams> {
    let p: ForceParams = serde_json::from_reader(open(path)?).context(path.display())?;
    p.validate().context(path.display())?;
    Ok(p)
}

pub fn script(path: &Path) -> Result<TrajectoryScript> {
    TrajectoryScript::from_jsonl(open(path)?).context(path.display())
}

pub fn trial_log(path: &Path) -> Result<TrialLog> {
    TrialLog::from_jsonl(open(path)?).context(path.display())
}

pub fn mask(path: &Path) -> Result<Mask> {
    if !path.exists() {
        return Err(CliError::missing(path));
    }
    pgm::read_mask(path).context(path.display())
}

pub fn scalar_texture(path: &Path) -> Result<ScalarTexture> {
    if !path.exists() {
        return Err(CliError::missing(path));
    }
    pgm::read_scalar_texture(path).context(path.display())
}

pub fn json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).context(path.display())?;
    serde_json::from_str(&text).context(path.display())
}

/// A mesh, its index and field, and the force parameters for it.
#[derive(Clone, Debug)]
pub struct Surface {
    pub index: SurfaceIndex,
    pub field: Arc<DistanceField>,
    pub params: ForceParams,
}

impl Surface {
    /// Loads mesh and field; parameters default to the fitted set.
    pub fn load(mesh_path: &Path, sdf_path: &Path, params_path: Option<&Path>) -> Result<Self> {
        let index = SurfaceIndex::new(mesh(mesh_path)?);
        let field = field(sdf_path)?;
        let params = match params_path {
            Some(p) => params(p)?,
            None => ForceParams::fitted(index.mesh().aabb_diagonal(), field.spacing),
        };
        Ok(Self {
            index,
            field: Arc::new(field),
            params,
        })
    }
}
