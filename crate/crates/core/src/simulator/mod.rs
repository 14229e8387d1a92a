//! Fixed-rate stylus and proxy dynamics.
//!
//! The stylus is a unit point mass pulled towards a scripted goal by a
//! critically damped hand spring. The proxy follows it but stays on or above
//! the surface; the spring-damper between them and, in snap mode, the snap
//! force act on the stylus. Integration is semi-implicit Euler.

mod events;
mod log;
mod proxy;
mod script;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distfield::{DistanceField, SurfaceHit, SurfaceIndex};
use crate::forcemodel::{spring_damper_force, ForceError, ForceParams, ForceSample, Zone};
use crate::Vec3;

pub use events::{detect_events, touch_count, Event, EventKind};
pub use log::{params_hash, Frame, LogHeader, TrialLog};
pub use proxy::{signed_distance, update_proxy, ProxyUpdate, MAX_SLIDE_ITERATIONS};
pub use script::{ScriptSample, TrajectoryScript};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unstable integration at t = {t}: stylus left the workspace guard")]
    UnstableIntegration { t: f64 },
    #[error("timestep must be positive and finite")]
    BadTimestep,
    #[error(transparent)]
    Force(#[from] ForceError),
    #[error("invalid script: {0}")]
    InvalidScript(String),
    #[error("invalid log: {0}")]
    InvalidLog(String),
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Interaction condition of a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Visual pointer only: the stylus follows the hand, no forces.
    NoHaptic,
    /// Proxy coupling without snapping.
    Haptic,
    /// Proxy coupling plus the snap force.
    HapticSnap,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::NoHaptic, Mode::Haptic, Mode::HapticSnap];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::NoHaptic => "no_haptic",
            Mode::Haptic => "haptic",
            Mode::HapticSnap => "haptic_snap",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reachable device volume and its position resolution, in metres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceBounds {
    pub extents: [f64; 3],
    pub resolution: f64,
}

impl Default for WorkspaceBounds {
    fn default() -> Self {
        Self {
            extents: [0.16, 0.12, 0.07],
            resolution: 0.055e-3,
        }
    }
}

impl WorkspaceBounds {
    /// Rounds each coordinate to the nearest multiple of the resolution.
    pub fn quantize(&self, v: &Vec3) -> Vec3 {
        if self.resolution > 0.0 {
            v.map(|x| (x / self.resolution).round() * self.resolution)
        } else {
            *v
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub dt: f64,
    /// Virtual stylus mass (kg).
    pub mass: f64,
    /// Hand spring pulling the stylus to the goal (N/m).
    pub hand_stiffness: f64,
    /// Hand damping (N·s/m); critical when absent.
    pub hand_damping: Option<f64>,
    /// Viscous friction on tangential velocity while touching (N·s/m).
    pub friction: f64,
    /// Viscous drag on the stylus everywhere (N·s/m).
    pub air_viscosity: f64,
    pub workspace: WorkspaceBounds,
    /// Pointer cast direction in `no_haptic` mode.
    pub pointer_dir: Vec3,
    /// Contact tolerance as a fraction of the mesh bounding-box diagonal.
    pub contact_tol_rel: f64,
    /// Penetration tolerance as a fraction of the mesh bounding-box diagonal.
    pub penetration_tol_rel: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            mass: 1.0,
            hand_stiffness: 200.0,
            hand_damping: None,
            friction: 0.0,
            air_viscosity: 0.0,
            workspace: WorkspaceBounds::default(),
            pointer_dir: Vec3::new(0.0, 0.0, -1.0),
            contact_tol_rel: 1e-5,
            penetration_tol_rel: 1e-6,
        }
    }
}

impl SimConfig {
    pub fn hand_damping(&self) -> f64 {
        self.hand_damping
            .unwrap_or_else(|| 2.0 * (self.hand_stiffness * self.mass).sqrt())
    }
}

/// Dynamic state at one instant, with the forces it produces.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub s: Vec3,
    pub s_dot: Vec3,
    pub p: Vec3,
    pub zone: Zone,
    pub touching: bool,
    /// Surface point under the pointer, if any.
    pub highlight: Option<Vec3>,
    /// Coupling and snap forces evaluated at this state.
    pub forces: ForceSample,
}

/// A surface, its field, and the parameters of one simulated device.
#[derive(Clone, Debug)]
pub struct Simulator {
    index: SurfaceIndex,
    field: Arc<DistanceField>,
    params: ForceParams,
    config: SimConfig,
    contact_tol: f64,
    penetration_tol: f64,
    center: Vec3,
    guard_half: Vec3,
}

impl Simulator {
    pub fn new(
        index: SurfaceIndex,
        field: Arc<DistanceField>,
        params: ForceParams,
        config: SimConfig,
    ) -> Result<Self, SimError> {
        params.validate()?;
        if !(config.dt > 0.0 && config.dt.is_finite()) {
            return Err(SimError::BadTimestep);
        }
        let mesh = index.mesh();
        if mesh.is_empty() {
            return Err(SimError::EmptyMesh);
        }
        let (lo, hi) = mesh.aabb();
        let diag = (hi - lo).norm();
        let center = (lo + hi) * 0.5;
        let ws = Vec3::from(config.workspace.extents) * 0.5;
        let guard_half = ws.sup(&((hi - lo) * 0.5)) * 10.0;
        Ok(Self {
            contact_tol: config.contact_tol_rel * diag,
            penetration_tol: config.penetration_tol_rel * diag,
            index,
            field,
            params,
            config,
            center,
            guard_half,
        })
    }

    pub fn index(&self) -> &SurfaceIndex {
        &self.index
    }

    pub fn field(&self) -> &DistanceField {
        &self.field
    }

    pub fn params(&self) -> &ForceParams {
        &self.params
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn contact_tolerance(&self) -> f64 {
        self.contact_tol
    }

    pub fn penetration_tolerance(&self) -> f64 {
        self.penetration_tol
    }

    /// Replaces the force parameters; later steps use the new values.
    pub fn set_params(&mut self, params: ForceParams) -> Result<(), SimError> {
        params.validate()?;
        self.params = params;
        Ok(())
    }

    /// A point `sigma` above the top of the mesh's bounding box, over its centre.
    pub fn rest_position(&self) -> Vec3 {
        let (_, hi) = self.index.mesh().aabb();
        Vec3::new(self.center.x, self.center.y, hi.z + self.params.sigma)
    }

    /// Stylus at rest at `s0`, proxy at `s0` or on the surface below it.
    pub fn initial_state(&self, mode: Mode, s0: Vec3) -> SimState {
        let p = if mode == Mode::NoHaptic || signed_distance(&self.index, &s0) >= 0.0 {
            s0
        } else {
            self.nearest(&s0).point
        };
        self.evaluate(mode, 0.0, s0, Vec3::zeros(), p)
    }

    fn nearest(&self, q: &Vec3) -> SurfaceHit {
        self.index.nearest(q).expect("non-empty mesh")
    }

    fn pointer_hit(&self, s: &Vec3) -> Option<Vec3> {
        let dir = self.config.pointer_dir;
        self.index
            .raycast(s, &dir, 0.0, f64::INFINITY)
            .map(|h| s + dir * h.t)
    }

    /// Zone, contact flag, highlight and forces for a kinematic state. In
    /// no-haptic mode `p` is replaced by the pointer hit.
    fn evaluate(&self, mode: Mode, t: f64, s: Vec3, s_dot: Vec3, p: Vec3) -> SimState {
        let params = &self.params;
        if mode == Mode::NoHaptic {
            let hit = self.nearest(&s);
            let r_field = self.field.sample_distance(&s).unwrap_or(f64::INFINITY);
            let zone = self.classify(r_field, hit.distance);
            let highlight = self.pointer_hit(&s);
            let p = highlight.unwrap_or(s);
            return SimState {
                t,
                s,
                s_dot,
                p,
                zone,
                touching: false,
                highlight,
                forces: ForceSample::zero(zone),
            };
        }

        let hit = self.nearest(&p);
        let touching = hit.distance < self.contact_tol;
        let r_field = self.field.sample_distance(&p).unwrap_or(f64::INFINITY);
        let mut zone = self.classify(r_field, hit.distance);

        let f_spring = if p != s {
            spring_damper_force(&s, &p, &s_dot, params)
        } else {
            Vec3::zeros()
        };
        let mut f_snap = Vec3::zeros();
        if mode == Mode::HapticSnap && zone != Zone::NoSnap {
            let (r, dir) = if zone == Zone::Buffer {
                (hit.distance, Some(-hit.normal))
            } else {
                let exact = (hit.distance > 0.0).then(|| (hit.point - p) / hit.distance);
                (r_field, self.field.sample_direction(&p).ok().or(exact))
            };
            let magnitude = params.force_scale * params.profile(r / params.sigma);
            if magnitude != 0.0 {
                if let Some(d) = dir {
                    f_snap = d * magnitude;
                }
            }
        }
        if touching {
            zone = Zone::Contact;
        }
        let highlight = touching.then_some(p);
        SimState {
            t,
            s,
            s_dot,
            p,
            zone,
            touching,
            highlight,
            forces: ForceSample::new(f_spring, f_snap, zone),
        }
    }

    /// Engagement follows the sampled distance; the buffer shell also
    /// triggers on the exact distance so it is never missed between nodes.
    fn classify(&self, r_field: f64, r_exact: f64) -> Zone {
        if r_field >= self.params.sigma {
            Zone::NoSnap
        } else if r_field < self.params.buffer_eps || r_exact < self.params.buffer_eps {
            Zone::Buffer
        } else {
            Zone::Snap
        }
    }

    /// Advances one timestep towards `goal`; `None` releases the stylus.
    pub fn step(
        &self,
        state: &SimState,
        mode: Mode,
        goal: Option<Vec3>,
    ) -> Result<SimState, SimError> {
        let dt = self.config.dt;
        let t = state.t + dt;
        if mode == Mode::NoHaptic {
            let s = goal.unwrap_or(state.s);
            let s_dot = (s - state.s) / dt;
            self.guard(&s, t)?;
            return Ok(self.evaluate(mode, t, s, s_dot, s));
        }

        let cfg = &self.config;
        let v = state.s_dot;
        let mut force = state.forces.total;
        if let Some(g) = goal {
            force += (g - state.s) * cfg.hand_stiffness - v * cfg.hand_damping();
        }
        if cfg.friction != 0.0 && state.touching {
            let n = self.nearest(&state.p).normal;
            force -= (v - n * v.dot(&n)) * cfg.friction;
        }
        if cfg.air_viscosity != 0.0 {
            force -= v * cfg.air_viscosity;
        }
        let s_dot = v + force * (dt / cfg.mass);
        let s = state.s + s_dot * dt;
        self.guard(&s, t)?;
        let p = update_proxy(&self.index, &state.p, &s, self.contact_tol).p;
        Ok(self.evaluate(mode, t, s, s_dot, p))
    }

    fn guard(&self, s: &Vec3, t: f64) -> Result<(), SimError> {
        let off = s - self.center;
        if (0..3).all(|a| off[a].abs() <= self.guard_half[a]) {
            Ok(())
        } else {
            Err(SimError::UnstableIntegration { t })
        }
    }

    fn frame(&self, st: &SimState, buttons: (bool, bool, bool)) -> Frame {
        let ws = &self.config.workspace;
        Frame {
            t: st.t,
            s: ws.quantize(&st.s),
            p: ws.quantize(&st.p),
            zone: st.zone,
            touching: st.touching,
            select: buttons.0,
            brush: buttons.1,
            erase: buttons.2,
            highlight: st.highlight,
            f_spring: st.forces.f_spring,
            f_snap: st.forces.f_snap,
        }
    }

    /// Replays a script from rest at its first goal (or [`Self::rest_position`]).
    pub fn run_trajectory(
        &self,
        mode: Mode,
        script: &TrajectoryScript,
        task: &str,
    ) -> Result<TrialLog, SimError> {
        let start = script
            .samples
            .iter()
            .find_map(|s| s.goal)
            .unwrap_or_else(|| self.rest_position());
        self.run_trajectory_from(mode, script, task, start)
    }

    /// Replays a script starting with the stylus at rest at `start`.
    ///
    /// Frames are logged every step from the first sample time to the last.
    pub fn run_trajectory_from(
        &self,
        mode: Mode,
        script: &TrajectoryScript,
        task: &str,
        start: Vec3,
    ) -> Result<TrialLog, SimError> {
        script.validate()?;
        let header = LogHeader {
            mode,
            task: task.to_string(),
            params_hash: params_hash(&self.params),
            dt: self.config.dt,
            params: self.params.clone(),
        };
        let dt = self.config.dt;
        let t0 = script.samples.first().map_or(0.0, |s| s.t);
        let t1 = script.samples.last().map_or(0.0, |s| s.t);
        let steps = ((t1 - t0) / dt).round() as usize;

        let mut state = self.initial_state(mode, start);
        state.t = t0;
        let mut frames = Vec::with_capacity(steps + 1);
        frames.push(self.frame(&state, script.buttons_at(t0)));
        for k in 1..=steps {
            let t = t0 + k as f64 * dt;
            let next = self.step(&state, mode, script.goal_at(t))?;
            // Re-anchor time to avoid accumulated rounding.
            state = SimState { t, ..next };
            frames.push(self.frame(&state, script.buttons_at(t)));
        }
        Ok(TrialLog { header, frames })
    }
}
