//! One tuning session: a simulator with its own parameters and state over a
//! shared surface. Stepping is synchronous; the server serializes access.

use std::sync::Arc;

use serde_json::{Map, Value};
use snapforge::simulator::{SimConfig, SimState, Simulator};
use snapforge::{ForceParams, Mode, Vec3};

use crate::api::{FramePayload, ParamsAck, SessionInfo};
use crate::catalog::Surface;
use crate::FRAME_EVERY;

/// Most steps one request may ask for: a minute of simulated time.
pub const MAX_STEPS_PER_REQUEST: u64 = 60_000;

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Finite goal coordinates, or an error naming the bad value.
pub fn parse_goal(goal: Option<[f64; 3]>) -> Result<Option<Vec3>, String> {
    match goal {
        Some(g) if g.iter().all(|v| v.is_finite()) => Ok(Some(Vec3::from(g))),
        Some(g) => Err(format!("goal {g:?} is not finite")),
        None => Ok(None),
    }
}

pub struct Session {
    pub id: String,
    pub surface: Arc<Surface>,
    sim: Simulator,
    mode: Mode,
    state: SimState,
    goal: Option<Vec3>,
    step: u64,
    params_version: u64,
    /// Set while a stream socket is attached.
    pub streaming: bool,
    /// Set when the session is deleted; attached streams end.
    pub closed: bool,
}

impl Session {
    pub fn new(
        id: String,
        surface: Arc<Surface>,
        mode: Mode,
        params: Option<ForceParams>,
    ) -> Result<Self, String> {
        let params = params.unwrap_or_else(|| surface.default_params.clone());
        let sim = Simulator::new(
            surface.index.clone(),
            surface.field.clone(),
            params,
            SimConfig::default(),
        )
        .map_err(|e| e.to_string())?;
        let rest = sim.rest_position();
        let state = sim.initial_state(mode, rest);
        Ok(Self {
            id,
            surface,
            sim,
            mode,
            state,
            goal: Some(rest),
            step: 0,
            params_version: 0,
            streaming: false,
            closed: false,
        })
    }

    pub fn params(&self) -> &ForceParams {
        self.sim.params()
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            id: self.id.clone(),
            surface: self.surface.name.clone(),
            mode: self.mode,
            params: self.params().clone(),
            params_version: self.params_version,
            ranges: self.surface.ranges(),
            rate_hz: 1.0 / self.sim.config().dt,
            frame_every: FRAME_EVERY,
            rest: arr(&self.sim.rest_position()),
            bounds: self.surface.bounds(),
        }
    }

    /// Applies a partial parameter object. Unknown keys and invalid results
    /// are rejected and leave the parameters unchanged. The next step uses
    /// the new values.
    pub fn patch_params(&mut self, patch: &Map<String, Value>) -> Result<ParamsAck, String> {
        let mut current = match serde_json::to_value(self.params()) {
            Ok(Value::Object(m)) => m,
            _ => unreachable!("parameters serialize to an object"),
        };
        for (k, v) in patch {
            match current.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => return Err(format!("unknown parameter {k:?}")),
            }
        }
        let params: ForceParams =
            serde_json::from_value(Value::Object(current)).map_err(|e| e.to_string())?;
        self.sim.set_params(params).map_err(|e| e.to_string())?;
        self.params_version += 1;
        Ok(ParamsAck {
            params: self.params().clone(),
            params_version: self.params_version,
        })
    }

    pub fn set_goal(&mut self, goal: Option<[f64; 3]>) -> Result<(), String> {
        self.goal = parse_goal(goal)?;
        Ok(())
    }

    /// Stylus at rest at `position` (default: the rest position), holding it.
    pub fn reset(&mut self, position: Option<[f64; 3]>) -> Result<(), String> {
        let at = parse_goal(position)?.unwrap_or_else(|| self.sim.rest_position());
        self.state = self.sim.initial_state(self.mode, at);
        self.goal = Some(at);
        self.step = 0;
        Ok(())
    }

    pub fn frame(&self) -> FramePayload {
        let st = &self.state;
        FramePayload {
            step: self.step,
            t: st.t,
            s: arr(&st.s),
            p: arr(&st.p),
            zone: st.zone,
            touching: st.touching,
            goal: self.goal.as_ref().map(arr),
            f_spring: arr(&st.forces.f_spring),
            f_snap: arr(&st.forces.f_snap),
            f_total: arr(&st.forces.total),
            params_version: self.params_version,
        }
    }

    /// Runs `n` steps towards the current goal, pushing a frame after every
    /// step whose index is a multiple of `every` and after the last one.
    ///
    /// A diverging integration resets the stylus to rest and is reported.
    pub fn advance(&mut self, n: u64, every: u64, frames: &mut Vec<FramePayload>) -> Result<(), String> {
        if n > MAX_STEPS_PER_REQUEST {
            return Err(format!("at most {MAX_STEPS_PER_REQUEST} steps per request, got {n}"));
        }
        let every = every.max(1);
        let dt = self.sim.config().dt;
        for k in 0..n {
            match self.sim.step(&self.state, self.mode, self.goal) {
                Ok(next) => {
                    self.step += 1;
                    self.state = SimState {
                        t: self.step as f64 * dt,
                        ..next
                    };
                }
                Err(e) => {
                    self.reset(None)?;
                    return Err(format!("{e}; stylus reset to rest"));
                }
            }
            if self.step.is_multiple_of(every) || k + 1 == n {
                frames.push(self.frame());
            }
        }
        Ok(())
    }
}
