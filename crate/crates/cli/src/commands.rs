use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use snapforge::analysis::{summarize, SummaryConfig, Task};
use snapforge::brushing::{make_band_texture, record_brush, BandSpec, Mask};
use snapforge::distfield::{build_distance_field, write_field, SurfaceIndex};
use snapforge::forcemodel::{profile_csv, profile_table};
use snapforge::pgm;
use snapforge::simulator::{detect_events, touch_count, SimConfig, Simulator, WorkspaceBounds};
use snapforge::surfacegen::{
    gen_heightfield, gen_scalar_texture, heightfield_to_mesh, write_obj, GaussianMixtureSpec,
    HeightField, HeightFieldSpec, TriMesh,
};
use snapforge::{TrajectoryScript, Vec3};

use crate::cli::*;
use crate::config::PipelineConfig;
use crate::error::{CliError, Context, Result};
use crate::evaluate::{
    completion_time, curve_metrics, evaluate_trial, read_metrics_csv, write_metrics_csv,
    LoadedTarget, MetricsRow, TrialInputs,
};
use crate::inputs::{self, Surface};
use crate::manifest::{manifest_path, Invocation, Recorder};
use crate::report::{plot_csv, report_csv};

/// What a command produced, for printing.
#[derive(Debug, Default, Serialize)]
pub struct Outcome {
    pub command: String,
    pub manifest: Option<String>,
    /// Output path → SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub text: Vec<String>,
}

impl Outcome {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            details: json!({}),
            ..Self::default()
        }
    }

    pub fn finish(mut self, rec: Recorder, inv: &Invocation, path: &Path) -> Result<Self> {
        self.outputs = rec.outputs().clone();
        rec.finish(inv, path)?;
        self.manifest = Some(path.display().to_string());
        Ok(self)
    }

    /// Merges another stage's outputs into this one.
    fn absorb(&mut self, stage: Outcome) {
        self.outputs.extend(stage.outputs);
        self.text.extend(stage.text);
        self.details[&stage.command] = stage.details;
    }
}

pub fn execute(cli: &Cli, inv: &Invocation) -> Result<Outcome> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, inv),
        Command::Sdf(a) => cmd_sdf(a, inv),
        Command::Simulate(a) => match (&a.config, &a.out_dir) {
            (Some(c), Some(d)) => simulate_batch(&PipelineConfig::load(c)?, c, d, inv),
            _ => cmd_simulate(a, inv),
        },
        Command::Brush(a) => match (&a.config, &a.out_dir) {
            (Some(c), Some(d)) => brush_batch(&PipelineConfig::load(c)?, c, d, inv),
            _ => cmd_brush(a, inv),
        },
        Command::Eval(a) => match (&a.config, &a.out_dir) {
            (Some(c), Some(d)) => eval_batch(&PipelineConfig::load(c)?, c, d, inv),
            _ => cmd_eval(a, inv),
        },
        Command::Report(a) => cmd_report(a, inv),
        Command::Run(a) => cmd_run(a, inv),
        Command::Demo(a) => crate::demo::cmd_demo(a, inv),
        Command::Profile(a) => cmd_profile(a, inv),
    }
}

/// Height field and mesh for a spec, optionally centred on the origin.
pub fn surface_from_spec(
    spec: &HeightFieldSpec,
    upsample: usize,
    center: bool,
) -> Result<(HeightField, TriMesh)> {
    let hf = gen_heightfield(spec)?;
    let mut mesh = heightfield_to_mesh(&hf, upsample)?;
    if center {
        let (lo, hi) = mesh.aabb();
        let shift = Vec3::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0, 0.0);
        mesh.vertices.iter_mut().for_each(|v| *v -= shift);
    }
    Ok((hf, mesh))
}

fn cmd_gen(a: &GenArgs, inv: &Invocation) -> Result<Outcome> {
    let mut rec = Recorder::new("gen");
    let mut out = Outcome::new("gen");
    if let Some(spec) = &a.spec {
        if !spec.exists() {
            return Err(CliError::missing(spec));
        }
        rec.input(spec)?;
    }
    match a.kind {
        GenKind::Surface => {
            if a.components.is_some() {
                return Err(CliError::bad_args("--components applies to --kind texture"));
            }
            let path = a.spec.as_ref().expect("clap requires --spec");
            let text = std::fs::read_to_string(path).context(path.display())?;
            let mut spec = HeightFieldSpec::from_json(&text).context(path.display())?;
            if let Some(seed) = a.seed {
                spec.seed = seed;
            }
            rec.seed(spec.seed);
            let (hf, mesh) = surface_from_spec(&spec, a.upsample, a.center)?;
            rec.write(&a.out, write_obj(&mesh).as_bytes())?;
            if let Some(hp) = &a.heightfield {
                pgm::write_heightfield(hp, &hf).context(hp.display())?;
                rec.output(hp)?;
                rec.output(&pgm::sidecar_path(hp))?;
            }
            out.details = json!({
                "vertices": mesh.vertices.len(),
                "triangles": mesh.triangles.len(),
                "seed": spec.seed,
            });
            out.text.push(format!(
                "wrote {} ({} vertices, {} triangles)",
                a.out.display(),
                mesh.vertices.len(),
                mesh.triangles.len()
            ));
        }
        GenKind::Texture => {
            let mixture = match (&a.spec, a.components) {
                (Some(path), _) => inputs::json::<GaussianMixtureSpec>(path)?,
                (None, Some(n)) => {
                    let seed = a.seed.unwrap_or(0);
                    rec.seed(seed);
                    GaussianMixtureSpec::random(n, seed)
                }
                (None, None) => unreachable!("clap requires --spec or --components"),
            };
            let (w, h) = a.size;
            let tex = gen_scalar_texture(&mixture, w, h)?;
            pgm::write_scalar_texture(&a.out, &tex).context(a.out.display())?;
            rec.output(&a.out)?;
            rec.output(&pgm::sidecar_path(&a.out))?;
            out.details = json!({ "width": w, "height": h, "contour_levels": tex.contour_levels });
            out.text
                .push(format!("wrote {} ({w}x{h} scalar texture)", a.out.display()));
        }
    }
    out.finish(rec, inv, &manifest_path(&a.out))
}

fn cmd_sdf(a: &SdfArgs, inv: &Invocation) -> Result<Outcome> {
    let mut rec = Recorder::new("sdf");
    let mesh = inputs::mesh(&a.mesh)?;
    rec.input(&a.mesh)?;
    let index = SurfaceIndex::new(mesh);
    let df = build_distance_field(&index, a.sdf_res)?;
    let mut bytes = Vec::new();
    write_field(&df, &mut bytes)?;
    rec.write(&a.out, &bytes)?;
    let mut out = Outcome::new("sdf");
    out.details = json!({ "dims": df.dims, "spacing": df.spacing, "origin": [df.origin.x, df.origin.y, df.origin.z] });
    out.text.push(format!(
        "wrote {} ({}x{}x{} nodes, spacing {:.4e})",
        a.out.display(),
        df.dims[0],
        df.dims[1],
        df.dims[2],
        df.spacing
    ));
    out.finish(rec, inv, &manifest_path(&a.out))
}

fn warn_outside_workspace(script: &TrajectoryScript, name: &str) {
    let ws = WorkspaceBounds::default();
    let outside = script.outside(&Vec3::zeros(), &ws.extents);
    if !outside.is_empty() {
        log::warn!(
            "{name}: {} goal sample(s) outside the device workspace, first at index {}",
            outside.len(),
            outside[0]
        );
    }
}

fn cmd_simulate(a: &SimulateArgs, inv: &Invocation) -> Result<Outcome> {
    let (mesh_path, mode, script_path, out_path) = match (&a.mesh, a.mode, &a.script, &a.out) {
        (Some(m), Some(mode), Some(s), Some(o)) => (m, mode, s, o),
        _ => return Err(CliError::bad_args("simulate needs --mesh, --mode, --script and --out")),
    };
    let mut rec = Recorder::new("simulate");
    let index = SurfaceIndex::new(inputs::mesh(mesh_path)?);
    rec.input(mesh_path)?;
    let field = match &a.sdf {
        Some(p) => {
            let f = inputs::field(p)?;
            rec.input(p)?;
            f
        }
        None => build_distance_field(&index, a.sdf_res)?,
    };
    let params = match &a.params {
        Some(p) => {
            let v = inputs::params(p)?;
            rec.input(p)?;
            v
        }
        None => snapforge::ForceParams::fitted(index.mesh().aabb_diagonal(), field.spacing),
    };
    let script = inputs::script(script_path)?;
    rec.input(script_path)?;
    warn_outside_workspace(&script, &script_path.display().to_string());
    let sim = Simulator::new(index, std::sync::Arc::new(field), params, SimConfig::default())?;
    let log = sim.run_trajectory(mode, &script, &a.task)?;
    let mut bytes = Vec::new();
    log.write_jsonl(&mut bytes)?;
    rec.write(out_path, &bytes)?;
    let mut out = Outcome::new("simulate");
    out.details = json!({ "frames": log.frames.len(), "mode": mode, "params_hash": log.header.params_hash });
    out.text.push(format!(
        "wrote {} ({} frames, {mode})",
        out_path.display(),
        log.frames.len()
    ));
    out.finish(rec, inv, &manifest_path(out_path))
}

fn load_surfaces(config: &PipelineConfig) -> Result<BTreeMap<String, Surface>> {
    config
        .surfaces
        .iter()
        .map(|(name, s)| {
            let params = s.params.as_ref().map(|p| config.path(p));
            let surface = Surface::load(&config.path(&s.mesh), &config.path(&s.sdf), params.as_deref())
                .map_err(|e| e.context(format!("surface {name}")))?;
            Ok((name.clone(), surface))
        })
        .collect()
}

fn config_inputs(rec: &mut Recorder, config_path: &Path, config: &PipelineConfig) -> Result<()> {
    rec.input(config_path)?;
    for p in config.referenced_files() {
        rec.input(&p)?;
    }
    Ok(())
}

fn log_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join("logs").join(format!("{id}.jsonl"))
}

fn brush_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join("brush").join(format!("{id}.pgm"))
}

fn simulate_batch(config: &PipelineConfig, config_path: &Path, out_dir: &Path, inv: &Invocation) -> Result<Outcome> {
    let surfaces = load_surfaces(config)?;
    let mut rec = Recorder::new("simulate");
    config_inputs(&mut rec, config_path, config)?;
    // Trials are independent; results are collected in config order.
    let logs: Vec<Result<(usize, Vec<u8>)>> = config
        .trials
        .par_iter()
        .map(|trial| {
            let task = config.task(trial);
            let s = &surfaces[&task.surface];
            let script = inputs::script(&config.path(&trial.script))?;
            let sim = Simulator::new(s.index.clone(), s.field.clone(), s.params.clone(), SimConfig::default())?;
            let log = sim
                .run_trajectory(trial.mode, &script, task.task.as_str())
                .context(format!("trial {}", trial.id))?;
            let mut bytes = Vec::new();
            log.write_jsonl(&mut bytes)?;
            Ok((log.frames.len(), bytes))
        })
        .collect();
    let mut frames = 0;
    for (trial, result) in config.trials.iter().zip(logs) {
        let (n, bytes) = result?;
        frames += n;
        rec.write(&log_path(out_dir, &trial.id), &bytes)?;
    }
    let mut out = Outcome::new("simulate");
    out.details = json!({ "trials": config.trials.len(), "frames": frames });
    out.text.push(format!(
        "simulated {} trials ({frames} frames) into {}",
        config.trials.len(),
        out_dir.join("logs").display()
    ));
    out.finish(rec, inv, &manifest_path(&out_dir.join("logs")))
}

fn cmd_brush(a: &BrushArgs, inv: &Invocation) -> Result<Outcome> {
    let (log_p, mesh_p, out_p) = match (&a.log, &a.mesh, &a.out) {
        (Some(l), Some(m), Some(o)) => (l, m, o),
        _ => return Err(CliError::bad_args("brush needs --log, --mesh and --out")),
    };
    let mut rec = Recorder::new("brush");
    let log = inputs::trial_log(log_p)?;
    rec.input(log_p)?;
    let index = SurfaceIndex::new(inputs::mesh(mesh_p)?);
    rec.input(mesh_p)?;
    let (w, h) = a.size;
    let brushed = record_brush(&log, &index, w, h)?;
    rec.write(out_p, &pgm::encode_mask(&brushed.texture)?)?;
    let mut out = Outcome::new("brush");
    out.details = json!({ "tagged": brushed.texture.count(), "skipped": brushed.skipped });
    out.text.push(format!(
        "wrote {} ({} texels tagged, {} frames skipped)",
        out_p.display(),
        brushed.texture.count(),
        brushed.skipped
    ));
    out.finish(rec, inv, &manifest_path(out_p))
}

fn brush_batch(config: &PipelineConfig, config_path: &Path, out_dir: &Path, inv: &Invocation) -> Result<Outcome> {
    let mut rec = Recorder::new("brush");
    rec.input(config_path)?;
    let mut indices = BTreeMap::new();
    for (name, s) in &config.surfaces {
        let p = config.path(&s.mesh);
        rec.input(&p)?;
        indices.insert(name.clone(), SurfaceIndex::new(inputs::mesh(&p)?));
    }
    let curve_trials: Vec<_> = config
        .trials
        .iter()
        .filter_map(|t| config.task(t).band.as_ref().map(|b| (t, b)))
        .collect();
    let mut skipped = 0;
    for (trial, band) in &curve_trials {
        let lp = log_path(out_dir, &trial.id);
        let log = inputs::trial_log(&lp)?;
        rec.input(&lp)?;
        let index = &indices[&config.task(trial).surface];
        let brushed = record_brush(&log, index, band.width, band.height)?;
        if brushed.skipped > 0 {
            log::info!("trial {}: {} brush frames without a surface point", trial.id, brushed.skipped);
        }
        skipped += brushed.skipped;
        rec.write(&brush_path(out_dir, &trial.id), &pgm::encode_mask(&brushed.texture)?)?;
    }
    let mut out = Outcome::new("brush");
    out.details = json!({ "textures": curve_trials.len(), "skipped_frames": skipped });
    out.text.push(format!(
        "brushed {} curve trials into {}",
        curve_trials.len(),
        out_dir.join("brush").display()
    ));
    out.finish(rec, inv, &manifest_path(&out_dir.join("brush")))
}

fn cmd_eval(a: &EvalArgs, inv: &Invocation) -> Result<Outcome> {
    let (brush_p, log_p, out_p) = match (&a.brush, &a.log, &a.out) {
        (Some(b), Some(l), Some(o)) => (b, l, o),
        _ => return Err(CliError::bad_args("eval needs --brush, --log and --out")),
    };
    let mut rec = Recorder::new("eval");
    let brush = inputs::mask(brush_p)?;
    rec.input(brush_p)?;
    let (band, medial): (Mask, Mask) = match (&a.band_spec, &a.band, &a.medial) {
        (Some(spec), _, _) => {
            let s: BandSpec = inputs::json(spec)?;
            rec.input(spec)?;
            make_band_texture(&s).context(spec.display())?
        }
        (None, Some(b), Some(m)) => {
            rec.input(b)?;
            rec.input(m)?;
            (inputs::mask(b)?, inputs::mask(m)?)
        }
        _ => return Err(CliError::bad_args("eval needs --band-spec or --band with --medial")),
    };
    let log = inputs::trial_log(log_p)?;
    rec.input(log_p)?;
    let task = match a.task {
        Some(t) => t,
        None => log.header.task.parse::<Task>().map_err(|_| {
            CliError::bad_args(format!(
                "log task {:?} is not a study task; pass --task",
                log.header.task
            ))
        })?,
    };
    let (deviation, irregularity) = curve_metrics(&band, &medial, &brush)?;
    let events = detect_events(&log);
    let row = MetricsRow {
        trial_id: log_p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        participant: a.participant.clone(),
        mode: log.header.mode,
        task,
        trial: a.trial,
        completion_time: completion_time(&log, &events),
        touch_count: touch_count(&events),
        deviation: Some(deviation),
        irregularity: Some(irregularity),
        measured: None,
        truth: None,
        localization_error: None,
        retained: None,
    };
    rec.write(out_p, &write_metrics_csv(std::slice::from_ref(&row))?)?;
    let mut out = Outcome::new("eval");
    out.details = serde_json::to_value(&row)?;
    out.text.push(format!(
        "deviation {deviation:.6}, irregularity {irregularity:.6}, completion {:.3} s, {} touches",
        row.completion_time, row.touch_count
    ));
    out.finish(rec, inv, &manifest_path(out_p))
}

fn eval_batch(config: &PipelineConfig, config_path: &Path, out_dir: &Path, inv: &Invocation) -> Result<Outcome> {
    let mut rec = Recorder::new("eval");
    rec.input(config_path)?;
    let mut indices = BTreeMap::new();
    for (name, s) in &config.surfaces {
        let p = config.path(&s.mesh);
        rec.input(&p)?;
        indices.insert(name.clone(), SurfaceIndex::new(inputs::mesh(&p)?));
    }
    let mut targets = BTreeMap::new();
    for (name, t) in &config.tasks {
        if let (Some(target), Some(truth)) = (&t.target, t.truth) {
            if let crate::config::Target::Texture { texture } = target {
                rec.input(&config.path(texture))?;
            }
            targets.insert(name.clone(), (LoadedTarget::load(target, |p| config.path(p))?, truth));
        }
    }
    let mut rows = Vec::with_capacity(config.trials.len());
    for trial in &config.trials {
        let task = config.task(trial);
        let lp = log_path(out_dir, &trial.id);
        let log = inputs::trial_log(&lp)?;
        rec.input(&lp)?;
        let brush = match &task.band {
            Some(_) => {
                let bp = brush_path(out_dir, &trial.id);
                let m = inputs::mask(&bp)?;
                rec.input(&bp)?;
                Some(m)
            }
            None => None,
        };
        let target = targets.get(&trial.task).map(|(t, truth)| (t, *truth));
        rows.push(evaluate_trial(&TrialInputs {
            id: &trial.id,
            participant: &trial.participant,
            task: task.task,
            trial: trial.trial,
            log: &log,
            index: &indices[&task.surface],
            band: task.band.as_ref(),
            brush: brush.as_ref(),
            target,
        })?);
    }
    let path = out_dir.join("metrics.csv");
    rec.write(&path, &write_metrics_csv(&rows)?)?;
    let answered = rows.iter().filter(|r| r.measured.is_some()).count();
    let retained = rows.iter().filter(|r| r.retained == Some(true)).count();
    let scored = rows.iter().filter(|r| r.deviation.is_some()).count();
    let mut out = Outcome::new("eval");
    out.details = json!({ "trials": rows.len(), "curves_scored": scored, "answers": answered, "answers_retained": retained });
    out.text.push(format!(
        "scored {} trials into {} ({scored} curves, {retained}/{answered} answers within 5%)",
        rows.len(),
        path.display()
    ));
    out.finish(rec, inv, &manifest_path(&path))
}

/// Sibling path with a new suffix: `report.csv` → `report.summary.json`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn report_stage(
    metrics: &Path,
    out_p: &Path,
    config: SummaryConfig,
    inv: &Invocation,
) -> Result<Outcome> {
    let mut rec = Recorder::new("report");
    rec.seed(config.seed);
    if !metrics.exists() {
        return Err(CliError::missing(metrics));
    }
    let bytes = std::fs::read(metrics).context(metrics.display())?;
    rec.input(metrics)?;
    let rows = read_metrics_csv(&bytes).context(metrics.display())?;
    let records: Vec<_> = rows.iter().map(MetricsRow::to_record).collect();
    let report = summarize(&records, &config)?;
    let summary_p = sibling(out_p, "summary.json");
    let plot_p = sibling(out_p, "plot.csv");
    rec.write(out_p, &report_csv(&report)?)?;
    let mut summary = serde_json::to_vec_pretty(&report)?;
    summary.push(b'\n');
    rec.write(&summary_p, &summary)?;
    rec.write(&plot_p, &plot_csv(&report)?)?;
    let significant = report.comparisons.iter().filter(|c| c.significant).count();
    let mut out = Outcome::new("report");
    out.details = json!({
        "comparisons": report.comparisons.len(),
        "significant": significant,
        "missing": report.missing.len(),
    });
    out.text.push(format!(
        "wrote {} ({} comparisons, {significant} with CIs excluding 0, {} missing cells)",
        out_p.display(),
        report.comparisons.len(),
        report.missing.len()
    ));
    out.finish(rec, inv, &manifest_path(out_p))
}

fn cmd_report(a: &ReportArgs, inv: &Invocation) -> Result<Outcome> {
    let config = SummaryConfig {
        n_resamples: a.resamples,
        level: a.level,
        seed: a.seed,
    };
    report_stage(&a.metrics, &a.out, config, inv)
}

fn cmd_run(a: &RunArgs, inv: &Invocation) -> Result<Outcome> {
    let config = PipelineConfig::load(&a.config)?;
    let mut out = Outcome::new("run");
    out.absorb(simulate_batch(&config, &a.config, &a.out_dir, inv)?);
    out.absorb(brush_batch(&config, &a.config, &a.out_dir, inv)?);
    out.absorb(eval_batch(&config, &a.config, &a.out_dir, inv)?);
    let summary = SummaryConfig {
        n_resamples: config.bootstrap.n_resamples,
        level: config.bootstrap.level,
        seed: config.seed,
    };
    let report = report_stage(
        &a.out_dir.join("metrics.csv"),
        &a.out_dir.join("report.csv"),
        summary,
        inv,
    )?;
    out.manifest = report.manifest.clone();
    out.absorb(report);
    Ok(out)
}

fn cmd_profile(a: &ProfileArgs, inv: &Invocation) -> Result<Outcome> {
    let rows = profile_table(a.amplitude, a.decay, a.samples)?;
    let csv = profile_csv(&rows);
    let mut out = Outcome::new("profile");
    out.details = serde_json::to_value(&rows)?;
    match &a.out {
        Some(p) => {
            let mut rec = Recorder::new("profile");
            rec.write(p, csv.as_bytes())?;
            out.text.push(format!("wrote {} ({} rows)", p.display(), rows.len()));
            out.finish(rec, inv, &manifest_path(p))
        }
        None => {
            out.text.extend(csv.lines().map(str::to_string));
            Ok(out)
        }
    }
}
