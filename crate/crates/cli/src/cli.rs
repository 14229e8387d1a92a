use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use snapforge::analysis::{Task, DEFAULT_LEVEL, DEFAULT_RESAMPLES};
use snapforge::distfield::DEFAULT_RESOLUTION;
use snapforge::Mode;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// Snap-to-surface haptics toolkit: build surfaces and distance fields,
/// simulate scripted trials, score brushed curves and compare modes.
///
/// Exit codes: 0 ok, 2 bad arguments or input content, 3 missing input,
/// 4 numerical failure, 1 anything else. SNAPFORGE_THREADS caps the
/// number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "snapforge", version)]
pub struct Cli {
    /// Output style on stdout.
    #[arg(long, value_enum, default_value_t, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a surface mesh or a scalar texture from a JSON spec
    Gen(GenArgs),
    /// Voxelize the distance to a mesh into a field cache
    Sdf(SdfArgs),
    /// Replay trajectory scripts through the haptic simulator
    Simulate(SimulateArgs),
    /// Replay the brush strokes of trial logs onto textures
    Brush(BrushArgs),
    /// Score trials: completion time, touches, curve and localization metrics
    Eval(EvalArgs),
    /// Bootstrap comparisons between interaction modes
    Report(ReportArgs),
    /// Simulate, brush, eval and report in one go from a pipeline config
    Run(RunArgs),
    /// Write the bundled demo study: surfaces, fields, scripts, pipeline config
    Demo(DemoArgs),
    /// Tabulate the snap-force profiles over x in [0, 1]
    Profile(ProfileArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Height field spec to OBJ mesh
    Surface,
    /// Gaussian mixture to PGM scalar texture
    Texture,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "surface")]
    pub kind: GenKind,
    /// HeightFieldSpec JSON (surface) or GaussianMixtureSpec JSON (texture).
    #[arg(long, required_unless_present = "components")]
    pub spec: Option<PathBuf>,
    /// Overrides the spec's seed; for textures without a spec, seeds the
    /// random mixture.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Surface: grid upsampling factor.
    #[arg(long, default_value_t = 1)]
    pub upsample: usize,
    /// Surface: shift the mesh so its footprint is centred on the origin.
    #[arg(long)]
    pub center: bool,
    /// Surface: also write the height field as PGM.
    #[arg(long)]
    pub heightfield: Option<PathBuf>,
    /// Texture: random mixture with this many components instead of a spec.
    #[arg(long, conflicts_with = "spec")]
    pub components: Option<usize>,
    /// Texture: size as WxH.
    #[arg(long, value_parser = parse_size, default_value = "256x256")]
    pub size: (usize, usize),
}

#[derive(Debug, Args)]
pub struct SdfArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Nodes along the longest axis.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub sdf_res: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Pipeline config: simulate every trial into <out-dir>/logs.
    #[arg(long, requires = "out_dir", conflicts_with_all = ["mesh", "script", "out"])]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    pub mesh: Option<PathBuf>,
    /// Field cache; built on the fly at --sdf-res when omitted.
    #[arg(long)]
    pub sdf: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub sdf_res: usize,
    /// ForceParams JSON; defaults are fitted to the mesh and field.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    pub mode: Option<Mode>,
    #[arg(long, required_unless_present = "config")]
    pub script: Option<PathBuf>,
    /// Task id written into the log header.
    #[arg(long, default_value = "none")]
    pub task: String,
    #[arg(long, required_unless_present = "config")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BrushArgs {
    /// Pipeline config: replay curve-task logs from <out-dir>/logs into
    /// <out-dir>/brush.
    #[arg(long, requires = "out_dir", conflicts_with_all = ["log", "mesh", "out"])]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    pub log: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    pub mesh: Option<PathBuf>,
    /// Texture size as WxH.
    #[arg(long, value_parser = parse_size, default_value = "256x256")]
    pub size: (usize, usize),
    #[arg(long, required_unless_present = "config")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Pipeline config: score every trial into <out-dir>/metrics.csv.
    #[arg(long, requires = "out_dir", conflicts_with_all = ["brush", "log", "out"])]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Brushed texture (PGM).
    #[arg(long, required_unless_present = "config")]
    pub brush: Option<PathBuf>,
    /// BandSpec JSON the curve is scored against.
    #[arg(long, conflicts_with_all = ["band", "medial"])]
    pub band_spec: Option<PathBuf>,
    /// Band mask (PGM); use with --medial instead of --band-spec.
    #[arg(long, requires = "medial")]
    pub band: Option<PathBuf>,
    /// Medial-axis mask (PGM).
    #[arg(long, requires = "band")]
    pub medial: Option<PathBuf>,
    /// Trial log: mode, task, completion time and touch count.
    #[arg(long, required_unless_present = "config")]
    pub log: Option<PathBuf>,
    /// Task tag when the log header does not carry one.
    #[arg(long)]
    pub task: Option<Task>,
    #[arg(long, default_value = "")]
    pub participant: String,
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
    #[arg(long, required_unless_present = "config")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Metrics CSV from `eval`.
    #[arg(long)]
    pub metrics: PathBuf,
    /// Comparisons CSV; the JSON summary and plot CSV go next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    pub resamples: usize,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub participants: usize,
    /// Repetitions per participant, mode and task.
    #[arg(long, default_value_t = 2)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = snapforge::demo::DEMO_RESOLUTION)]
    pub sdf_res: usize,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long = "a", default_value_t = 3.0)]
    pub amplitude: f64,
    #[arg(long = "b", default_value_t = 2.0)]
    pub decay: f64,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// CSV file; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("bad dimension {v:?} in {s:?}"))
    };
    Ok((parse(w)?, parse(h)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_size("128x64"), Ok((128, 64)));
        assert!(parse_size("128").is_err());
        assert!(parse_size("0x5").is_err());
    }

    #[test]
    fn single_simulate_needs_its_inputs() {
        let err = Cli::try_parse_from(["snapforge", "simulate", "--mesh", "m.obj"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let ok = Cli::try_parse_from(["snapforge", "simulate", "--config", "c.json", "--out-dir", "o"]);
        assert!(ok.is_ok());
    }
}
