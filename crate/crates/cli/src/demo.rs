//! The bundled demo study.
//!
//! Three surfaces with two tasks each, one per study task tag, and scripted
//! hands for every participant, mode and repetition. The hands share one
//! noise model across modes; they differ only in where they hold the
//! stylus: hovering above the surface for the pointer mode, pressing
//! slightly into it for the contact modes. Any difference between modes in
//! the resulting report comes from the simulated physics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use snapforge::analysis::Task;
use snapforge::brushing::BandSpec;
use snapforge::distfield::{build_distance_field, write_field, SurfaceIndex};
use snapforge::metrics::{depression_value, protrusion_scale, protrusion_value};
use snapforge::pgm;
use snapforge::simulator::ScriptSample;
use snapforge::surfacegen::{
    gen_scalar_texture, plane, write_obj, GaussianMixtureSpec, HeightFieldSpec, Layer, LayerKind,
    ScalarTexture, TriMesh, ValueScale,
};
use snapforge::{ForceParams, Mode, TrajectoryScript, Vec3};

use crate::cli::DemoArgs;
use crate::commands::{surface_from_spec, Outcome};
use crate::config::{BootstrapSettings, PipelineConfig, SurfaceDef, Target, TaskDef, TrialDef};
use crate::error::{CliError, Result};
use crate::manifest::{manifest_path, sha256_hex, Invocation, Recorder};

/// Pointer mode: the stylus hovers this far above the surface.
pub const HOVER: f64 = 0.004;
/// Contact modes: the hand holds the stylus this far below the surface.
pub const PRESS: f64 = -0.0015;
const SCRIPT_RATE: f64 = 100.0;
const TEXTURE_SIZE: usize = 128;
const BAND_HALF_WIDTH: f64 = 3.0;

pub fn hills_spec() -> HeightFieldSpec {
    HeightFieldSpec {
        layers: vec![
            Layer {
                kind: LayerKind::Gaussian2d {
                    center: [0.62, 0.42],
                    sigma: [0.14, 0.1],
                    rotation: 0.5,
                    amplitude: 0.016,
                },
                weight: 1.0,
            },
            Layer {
                kind: LayerKind::Perlin {
                    frequency: 4.0,
                    octaves: 3,
                    persistence: 0.5,
                    amplitude: 0.003,
                },
                weight: 1.0,
            },
        ],
        seed: 11,
        width: 41,
        height: 41,
        cell_size: 0.0025,
    }
}

pub fn crater_spec() -> HeightFieldSpec {
    HeightFieldSpec {
        layers: vec![
            Layer {
                kind: LayerKind::Gaussian2d {
                    center: [0.4, 0.55],
                    sigma: [0.12, 0.12],
                    rotation: 0.0,
                    amplitude: -0.014,
                },
                weight: 1.0,
            },
            Layer {
                kind: LayerKind::Sinusoid {
                    frequency: [2.0, 0.0],
                    phase: 0.0,
                    amplitude: 0.002,
                },
                weight: 1.0,
            },
        ],
        seed: 12,
        width: 41,
        height: 41,
        cell_size: 0.0025,
    }
}

/// Where a demo task's hand goes.
enum Gesture {
    /// Point at a world position and press select.
    Select(Vec3),
    /// Brush along a UV polyline.
    Trace(Vec<[f64; 2]>),
}

struct DemoTask {
    name: &'static str,
    surface: &'static str,
    def: TaskDef,
    gesture: Gesture,
}

fn band(polyline: Vec<[f64; 2]>) -> BandSpec {
    BandSpec {
        polyline,
        half_width: BAND_HALF_WIDTH,
        width: TEXTURE_SIZE,
        height: TEXTURE_SIZE,
    }
}

fn extreme_vertex(mesh: &TriMesh, highest: bool) -> Vec3 {
    let key = |v: &&Vec3| if highest { v.z } else { -v.z };
    *mesh
        .vertices
        .iter()
        .max_by(|a, b| key(a).total_cmp(&key(b)))
        .expect("non-empty mesh")
}

fn trace_task(name: &'static str, surface: &'static str, task: Task, polyline: Vec<[f64; 2]>) -> DemoTask {
    DemoTask {
        name,
        surface,
        def: TaskDef {
            task,
            surface: surface.into(),
            band: Some(band(polyline.clone())),
            target: None,
            truth: None,
        },
        gesture: Gesture::Trace(polyline),
    }
}

fn demo_tasks(hills: &TriMesh, crater: &TriMesh, field: &TriMesh, texture: &ScalarTexture) -> Vec<DemoTask> {
    let peak = extreme_vertex(hills, true);
    let display = [0.0, 1000.0];
    let peak_truth = protrusion_value(hills, &peak, &protrusion_scale(hills, display));

    let pit = extreme_vertex(crater, false);
    let rim = crater.aabb().1.z;
    let center = Vec3::new(pit.x, pit.y, rim);
    let pit_scale = ValueScale {
        source: [0.0, rim - pit.z],
        display,
    };
    let pit_truth = depression_value(&center, &pit, &pit_scale);

    let (i, j) = texture.argmax();
    let (lo, hi) = field.aabb();
    let uv = [(i as f64 + 0.5) / texture.width as f64, (j as f64 + 0.5) / texture.height as f64];
    let value_at = Vec3::new(lo.x + uv[0] * (hi.x - lo.x), lo.y + uv[1] * (hi.y - lo.y), 0.0);

    vec![
        DemoTask {
            name: "hills-peak",
            surface: "hills",
            def: TaskDef {
                task: Task::TaskProtrusion,
                surface: "hills".into(),
                band: None,
                target: Some(Target::Protrusion { display }),
                truth: Some(peak_truth),
            },
            gesture: Gesture::Select(peak),
        },
        trace_task(
            "hills-curve",
            "hills",
            Task::TaskCurve,
            vec![[0.12, 0.25], [0.35, 0.3], [0.55, 0.5], [0.7, 0.75], [0.88, 0.82]],
        ),
        DemoTask {
            name: "crater-pit",
            surface: "crater",
            def: TaskDef {
                task: Task::TaskDepression,
                surface: "crater".into(),
                band: None,
                target: Some(Target::Depression {
                    center: [center.x, center.y, center.z],
                    scale: pit_scale,
                }),
                truth: Some(pit_truth),
            },
            gesture: Gesture::Select(pit),
        },
        // The sinusoid layer has a trough along u = 0.75.
        trace_task("crater-groove", "crater", Task::TaskGroove, vec![[0.75, 0.12], [0.75, 0.88]]),
        DemoTask {
            name: "field-value",
            surface: "field",
            def: TaskDef {
                task: Task::TaskRandVal,
                surface: "field".into(),
                band: None,
                target: Some(Target::Texture {
                    texture: PathBuf::from("textures/field.pgm"),
                }),
                truth: Some(texture.get(i, j)),
            },
            gesture: Gesture::Select(value_at),
        },
        trace_task(
            "field-annotation",
            "field",
            Task::TaskAnnotation,
            vec![[0.2, 0.7], [0.35, 0.8], [0.55, 0.82], [0.75, 0.7], [0.85, 0.5]],
        ),
    ]
}

/// Height of the surface under `(x, y)`, if any.
fn surface_z(index: &SurfaceIndex, x: f64, y: f64) -> Option<f64> {
    let top = 1.0;
    index
        .raycast(&Vec3::new(x, y, top), &Vec3::new(0.0, 0.0, -1.0), 0.0, 2.0)
        .map(|h| top - h.t)
}

#[derive(Clone, Copy)]
struct Waypoint {
    t: f64,
    pos: Vec3,
    select: bool,
    brush: bool,
}

/// Samples the waypoint path at the script rate. Buttons hold the state of
/// the waypoint that starts each segment.
fn densify(points: &[Waypoint]) -> TrajectoryScript {
    let mut samples = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b.t - a.t) * SCRIPT_RATE).round().max(1.0) as usize;
        for k in 0..n {
            let f = k as f64 / n as f64;
            samples.push(ScriptSample {
                t: a.t + (b.t - a.t) * f,
                goal: Some(a.pos + (b.pos - a.pos) * f),
                select: a.select,
                brush: a.brush,
                erase: false,
            });
        }
    }
    if let Some(last) = points.last() {
        samples.push(ScriptSample {
            t: last.t,
            goal: Some(last.pos),
            select: last.select,
            brush: last.brush,
            erase: false,
        });
    }
    TrajectoryScript {
        sample_rate: Some(SCRIPT_RATE),
        samples,
    }
}

fn hand_offset(mode: Mode) -> f64 {
    match mode {
        Mode::NoHaptic => HOVER,
        Mode::Haptic | Mode::HapticSnap => PRESS,
    }
}

fn trial_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let digest = sha256_hex(format!("{seed}/{id}").as_bytes());
    let key = u64::from_str_radix(&digest[..16], 16).expect("hex digest");
    ChaCha8Rng::seed_from_u64(key)
}

/// Reach toward a target, settle on it, press select, lift away.
fn select_script(index: &SurfaceIndex, target: Vec3, mode: Mode, rng: &mut ChaCha8Rng) -> TrajectoryScript {
    let top = index.mesh().aabb().1.z;
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let reach = rng.random_range(0.02..0.03);
    let start = Vec3::new(target.x + reach * angle.cos(), target.y + reach * angle.sin(), top + 0.02);
    // Aim error of the hand, about half a millimetre.
    let aim = Vec3::new(
        target.x + rng.random_range(-0.0006..0.0006),
        target.y + rng.random_range(-0.0006..0.0006),
        0.0,
    );
    let ground = surface_z(index, aim.x, aim.y).unwrap_or(target.z);
    let above = Vec3::new(aim.x, aim.y, ground + 0.01);
    let rest = Vec3::new(aim.x, aim.y, ground + hand_offset(mode));

    let mut t = 0.0;
    let mut pts = vec![Waypoint { t, pos: start, select: false, brush: false }];
    let mut go = |dt: f64, pos: Vec3, select: bool, pts: &mut Vec<Waypoint>| {
        t += dt;
        pts.push(Waypoint { t, pos, select, brush: false });
    };
    go(rng.random_range(0.6..1.2), above, false, &mut pts);
    go(rng.random_range(0.3..0.45), rest, false, &mut pts);
    go(rng.random_range(0.25..0.5), rest, true, &mut pts);
    go(0.05, rest, false, &mut pts);
    go(0.3, Vec3::new(aim.x, aim.y, top + 0.02), false, &mut pts);
    densify(&pts)
}

/// Descend onto the start of a UV polyline, brush along it with a smooth
/// sideways wobble, lift away.
fn trace_script(index: &SurfaceIndex, uv: &[[f64; 2]], mode: Mode, rng: &mut ChaCha8Rng) -> TrajectoryScript {
    let (lo, hi) = index.mesh().aabb();
    let world: Vec<[f64; 2]> = uv
        .iter()
        .map(|p| [lo.x + p[0] * (hi.x - lo.x), lo.y + p[1] * (hi.y - lo.y)])
        .collect();
    let speed = rng.random_range(0.025..0.035);
    let wobble: Vec<(f64, f64, f64)> = (0..2)
        .map(|_| {
            (
                rng.random_range(0.0002..0.0005),
                rng.random_range(0.012..0.03),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let offset = hand_offset(mode);
    let ground = |x: f64, y: f64| surface_z(index, x, y).unwrap_or(0.0);

    let mut pts = Vec::new();
    let first = world[0];
    let z0 = ground(first[0], first[1]);
    pts.push(Waypoint { t: 0.0, pos: Vec3::new(first[0], first[1], hi.z + 0.02), select: false, brush: false });
    let mut t = rng.random_range(0.4..0.7);
    pts.push(Waypoint { t, pos: Vec3::new(first[0], first[1], z0 + offset), select: false, brush: false });
    t += 0.2;

    let step = 0.001;
    let mut s = 0.0;
    for seg in world.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let (dx, dy) = ((b[0] - a[0]) / len, (b[1] - a[1]) / len);
        let n = (len / step).ceil() as usize;
        for k in 0..n {
            let f = k as f64 / n as f64;
            let side: f64 = wobble
                .iter()
                .map(|(amp, wavelength, phase)| amp * (std::f64::consts::TAU * s / wavelength + phase).sin())
                .sum();
            let x = a[0] + f * (b[0] - a[0]) - dy * side;
            let y = a[1] + f * (b[1] - a[1]) + dx * side;
            pts.push(Waypoint { t, pos: Vec3::new(x, y, ground(x, y) + offset), select: false, brush: true });
            t += len / n as f64 / speed;
            s += len / n as f64;
        }
    }
    let last = world[world.len() - 1];
    let z1 = ground(last[0], last[1]);
    pts.push(Waypoint { t, pos: Vec3::new(last[0], last[1], z1 + offset), select: false, brush: false });
    pts.push(Waypoint { t: t + 0.3, pos: Vec3::new(last[0], last[1], hi.z + 0.02), select: false, brush: false });
    densify(&pts)
}

fn params_for(index: &SurfaceIndex, spacing: f64) -> ForceParams {
    ForceParams::fitted(index.mesh().aabb_diagonal(), spacing)
}

pub fn cmd_demo(a: &DemoArgs, inv: &Invocation) -> Result<Outcome> {
    if a.participants == 0 || a.trials == 0 {
        return Err(CliError::bad_args("--participants and --trials must be positive"));
    }
    let dir = &a.out;
    let mut rec = Recorder::new("demo");
    rec.seed(a.seed);

    let mut meshes = BTreeMap::new();
    for (name, spec) in [("hills", hills_spec()), ("crater", crater_spec())] {
        rec.write(
            &dir.join(format!("surfaces/{name}.json")),
            serde_json::to_string_pretty(&spec)?.as_bytes(),
        )?;
        let (_, mesh) = surface_from_spec(&spec, 2, true)?;
        meshes.insert(name, mesh);
    }
    meshes.insert("field", plane(0.1, 40));

    let mixture = GaussianMixtureSpec::random(4, a.seed);
    rec.write(
        &dir.join("textures/field-mixture.json"),
        serde_json::to_string_pretty(&mixture)?.as_bytes(),
    )?;
    let texture = gen_scalar_texture(&mixture, TEXTURE_SIZE, TEXTURE_SIZE)?;
    let tex_path = dir.join("textures/field.pgm");
    pgm::write_scalar_texture(&tex_path, &texture)?;
    rec.output(&tex_path)?;
    rec.output(&pgm::sidecar_path(&tex_path))?;

    let mut surfaces = BTreeMap::new();
    let mut indices = BTreeMap::new();
    for (name, mesh) in &meshes {
        let obj = PathBuf::from(format!("surfaces/{name}.obj"));
        let sdf = PathBuf::from(format!("surfaces/{name}.sdf"));
        let params = PathBuf::from(format!("surfaces/{name}.params.json"));
        rec.write(&dir.join(&obj), write_obj(mesh).as_bytes())?;
        let index = SurfaceIndex::new(mesh.clone());
        let field = build_distance_field(&index, a.sdf_res)?;
        let mut bytes = Vec::new();
        write_field(&field, &mut bytes)?;
        rec.write(&dir.join(&sdf), &bytes)?;
        rec.write(
            &dir.join(&params),
            serde_json::to_string_pretty(&params_for(&index, field.spacing))?.as_bytes(),
        )?;
        surfaces.insert(name.to_string(), SurfaceDef { mesh: obj, sdf, params: Some(params) });
        indices.insert(*name, index);
    }

    let tasks = demo_tasks(&meshes["hills"], &meshes["crater"], &meshes["field"], &texture);
    let mut trials = Vec::new();
    for p in 1..=a.participants {
        let participant = format!("p{p:02}");
        for mode in Mode::ALL {
            for task in &tasks {
                for k in 1..=a.trials {
                    let id = format!("{participant}-{mode}-{}-{k}", task.name);
                    let mut rng = trial_rng(a.seed, &id);
                    let index = &indices[task.surface];
                    let script = match &task.gesture {
                        Gesture::Select(target) => select_script(index, *target, mode, &mut rng),
                        Gesture::Trace(uv) => trace_script(index, uv, mode, &mut rng),
                    };
                    let path = PathBuf::from(format!("scripts/{id}.jsonl"));
                    let mut bytes = Vec::new();
                    script.write_jsonl(&mut bytes)?;
                    rec.write(&dir.join(&path), &bytes)?;
                    trials.push(TrialDef {
                        id,
                        participant: participant.clone(),
                        mode,
                        task: task.name.into(),
                        trial: k,
                        script: path,
                    });
                }
            }
        }
    }
    let config = PipelineConfig {
        seed: a.seed,
        bootstrap: BootstrapSettings {
            n_resamples: 2000,
            level: 0.95,
        },
        surfaces,
        tasks: tasks.into_iter().map(|t| (t.name.to_string(), t.def)).collect(),
        trials,
        base: PathBuf::new(),
    };
    let config_path = dir.join("pipeline.json");
    rec.write(&config_path, serde_json::to_string_pretty(&config)?.as_bytes())?;

    let mut out = Outcome::new("demo");
    out.details = json!({
        "config": config_path.display().to_string(),
        "surfaces": config.surfaces.len(),
        "tasks": config.tasks.len(),
        "trials": config.trials.len(),
    });
    out.text.push(format!(
        "wrote demo study to {}: {} surfaces, {} tasks, {} trial scripts",
        dir.display(),
        config.surfaces.len(),
        config.tasks.len(),
        config.trials.len()
    ));
    out.text.push(format!(
        "next: snapforge run --config {} --out-dir <dir>",
        config_path.display()
    ));
    out.finish(rec, inv, &manifest_path(&demo_root(dir)))
}

/// The demo manifest sits inside the output directory.
fn demo_root(dir: &Path) -> PathBuf {
    dir.join("demo")
}
