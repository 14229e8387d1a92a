//! Wire payloads. Every body is JSON; numbers are plain decimals that parse
//! back to the same `f64`.

use serde::{Deserialize, Serialize};
use snapforge::forcemodel::{ProfileRow, Zone};
use snapforge::{ForceParams, Mode};

/// `GET /profile?a=&b=&samples=`. Omitted values take the defaults below.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ProfileQuery {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub samples: Option<usize>,
}

pub const DEFAULT_PROFILE_SAMPLES: usize = 101;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileResponse {
    pub a: f64,
    pub b: f64,
    pub samples: usize,
    pub rows: Vec<ProfileRow>,
}

/// `POST /session`. All fields optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Catalogue name; the server default if omitted.
    pub surface: Option<String>,
    /// Defaults to `haptic_snap`.
    pub mode: Option<Mode>,
    /// Defaults to parameters fitted to the surface.
    pub params: Option<ForceParams>,
}

/// A slider: inclusive bounds and increment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Range {
    /// The slider positions `min, min + step, …, max`.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step).round() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

/// Advisory slider ranges. The server accepts any valid parameters; the
/// ranges only tell a UI where to put its sliders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranges {
    #[serde(rename = "amplitude_A")]
    pub amplitude: Range,
    #[serde(rename = "decay_B")]
    pub decay: Range,
    pub sigma: Range,
    pub kappa: Range,
    pub tau: Range,
}

impl Ranges {
    /// The pilot sweep for A and B, the rest scaled to the surface.
    pub fn for_surface(aabb_diagonal: f64) -> Self {
        let sweep = Range {
            min: 1.0,
            max: 5.0,
            step: 0.5,
        };
        Self {
            amplitude: sweep,
            decay: sweep,
            sigma: Range {
                min: 0.02 * aabb_diagonal,
                max: 0.3 * aabb_diagonal,
                step: 0.01 * aabb_diagonal,
            },
            kappa: Range {
                min: 100.0,
                max: 1500.0,
                step: 50.0,
            },
            tau: Range {
                min: 0.0,
                max: 30.0,
                step: 1.0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub surface: String,
    pub mode: Mode,
    pub params: ForceParams,
    pub params_version: u64,
    pub ranges: Ranges,
    /// Simulation rate.
    pub rate_hz: f64,
    /// Steps per streamed frame in real-time mode.
    pub frame_every: u64,
    /// Stylus rest position; the initial goal.
    pub rest: [f64; 3],
    /// Surface bounding box, `[min, max]`.
    pub bounds: [[f64; 3]; 2],
}

/// `POST /session/{id}/params` acknowledgement. `params_version` increases
/// with every accepted change; frames carry the version they were computed
/// with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsAck {
    pub params: ForceParams,
    pub params_version: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSummary {
    pub name: String,
    pub triangles: usize,
    pub bounds: [[f64; 3]; 2],
    pub default_params: ForceParams,
}

/// Messages a client sends on the stream socket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    /// New hand goal for the real-time clock; `null` lets go.
    Goal { goal: Option<[f64; 3]> },
    /// Advance exactly `steps` steps holding `goal`, streaming every
    /// `every`-th step (default [`crate::FRAME_EVERY`]) and the last one.
    Step {
        goal: Option<[f64; 3]>,
        steps: u64,
        #[serde(default)]
        every: Option<u64>,
    },
    /// Stylus back to rest at `position` (default: the rest position).
    Reset {
        #[serde(default)]
        position: Option<[f64; 3]>,
    },
}

/// Messages the server sends on the stream socket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Frame(FramePayload),
    Error { message: String },
}

/// One streamed simulation state. Forces are the library's values unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePayload {
    /// Steps since the session started or was reset.
    pub step: u64,
    pub t: f64,
    /// Stylus.
    pub s: [f64; 3],
    /// Proxy.
    pub p: [f64; 3],
    pub zone: Zone,
    pub touching: bool,
    pub goal: Option<[f64; 3]>,
    pub f_spring: [f64; 3],
    pub f_snap: [f64; 3],
    pub f_total: [f64; 3],
    pub params_version: u64,
}

/// Body of every non-2xx HTTP response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
