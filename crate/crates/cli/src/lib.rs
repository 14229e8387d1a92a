//! The `snapforge` command-line tool.
//!
//! Every command writes its artifacts plus a `<artifact>.manifest.json`
//! recording the arguments, working directory, seed and SHA-256 digests of
//! inputs and outputs. Batch commands driven by a [`config::PipelineConfig`]
//! treat their output directory (`logs/`, `brush/`) as the artifact.

pub mod cli;
pub mod commands;
pub mod config;
pub mod demo;
pub mod error;
pub mod evaluate;
pub mod inputs;
pub mod manifest;
pub mod report;

use error::{CliError, Result};

pub const THREADS_ENV: &str = "SNAPFORGE_THREADS";

/// Caps the global worker pool from `SNAPFORGE_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::bad_args(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::new(error::ErrorKind::Other, e.to_string()))
}
