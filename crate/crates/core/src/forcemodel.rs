//! Force laws: proxy spring-damper coupling and snap-force profiles.
//!
//! Distances inside the snap zone are normalised by `sigma` before they reach
//! a profile, so profiles are evaluated on `x = r / σ ∈ [0, 1)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Vec3;

/// Offset and slope of the affine map inside the decaying profile.
const G_SLOPE: f64 = 0.78;
const G_OFFSET: f64 = 0.02;

#[derive(Debug, Error, PartialEq)]
pub enum ForceError {
    #[error("invalid force parameters: {0}")]
    InvalidParams(String),
    #[error("inside the snap zone but no force direction is available")]
    NoDirection,
}

/// Shape of the snap-force magnitude over normalised distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `A·g(x)·exp(−B·g(x))`: weak on entry and at contact, strongest in between.
    #[default]
    Decay,
    /// `1/(2x+1)²`: strongest at contact. Takes no parameters.
    InverseSquare,
}

/// Where a point sits relative to the snap shells around the surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    NoSnap,
    Snap,
    Buffer,
    Contact,
}

/// Complete tunable parameter set of the haptic model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceParams {
    /// Spring constant (N/m).
    pub kappa: f64,
    /// Damping coefficient (N·s/m).
    pub tau: f64,
    #[serde(rename = "amplitude_A")]
    pub amplitude: f64,
    #[serde(rename = "decay_B")]
    pub decay: f64,
    /// Snap-zone threshold (m).
    pub sigma: f64,
    /// Buffer-zone width next to the surface (m).
    pub buffer_eps: f64,
    /// Newtons per unit of profile output.
    pub force_scale: f64,
    pub profile_kind: ProfileKind,
}

impl Default for ForceParams {
    fn default() -> Self {
        Self {
            kappa: 500.0,
            tau: 10.0,
            amplitude: 3.0,
            decay: 2.0,
            sigma: 0.01,
            buffer_eps: 0.001,
            force_scale: 1.0,
            profile_kind: ProfileKind::Decay,
        }
    }
}

impl ForceParams {
    /// Defaults with `sigma` at 10% of the surface's bounding-box diagonal and
    /// `buffer_eps` at two voxel spacings of its distance field.
    pub fn fitted(aabb_diagonal: f64, voxel_spacing: f64) -> Self {
        Self {
            sigma: 0.1 * aabb_diagonal,
            buffer_eps: 2.0 * voxel_spacing,
            ..Self::default()
        }
    }

    /// Checks the parameter invariants. A zero amplitude is accepted and
    /// switches the decaying profile off.
    pub fn validate(&self) -> Result<(), ForceError> {
        let all = [
            self.kappa,
            self.tau,
            self.amplitude,
            self.decay,
            self.sigma,
            self.buffer_eps,
            self.force_scale,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ForceError::InvalidParams("non-finite value".into()));
        }
        let fail = |m: &str| Err(ForceError::InvalidParams(m.into()));
        if self.kappa <= 0.0 {
            return fail("kappa must be positive");
        }
        if self.tau < 0.0 {
            return fail("tau must be non-negative");
        }
        if self.sigma <= 0.0 {
            return fail("sigma must be positive");
        }
        if !(self.buffer_eps > 0.0 && self.buffer_eps < self.sigma) {
            return fail("buffer_eps must lie in (0, sigma)");
        }
        if self.amplitude < 0.0 {
            return fail("amplitude_A must be non-negative");
        }
        if self.decay <= 0.0 {
            return fail("decay_B must be positive");
        }
        if self.force_scale < 0.0 {
            return fail("force_scale must be non-negative");
        }
        Ok(())
    }

    /// Profile value at normalised distance `x`.
    pub fn profile(&self, x: f64) -> f64 {
        match self.profile_kind {
            ProfileKind::Decay => f_decay(x, self.amplitude, self.decay),
            ProfileKind::InverseSquare => f_mag(x),
        }
    }
}

#[inline]
fn g(x: f64) -> f64 {
    G_SLOPE * x + G_OFFSET
}

/// Decaying snap profile `A·g(x)·e^(−B·g(x))` with `g(x) = 0.78x + 0.02`.
pub fn f_decay(x: f64, a: f64, b: f64) -> f64 {
    let gx = g(x);
    a * gx * (-b * gx).exp()
}

/// Normalised distance at which [`f_decay`] peaks, where `g(x) = 1/B`.
pub fn f_decay_argmax(b: f64) -> f64 {
    (1.0 / b - G_OFFSET) / G_SLOPE
}

/// Inverse-square control profile `1/(2x+1)²`.
pub fn f_mag(x: f64) -> f64 {
    let d = 2.0 * x + 1.0;
    1.0 / (d * d)
}

/// Proxy coupling `−κ(s−p) − τ·ṡ`.
pub fn spring_damper_force(s: &Vec3, p: &Vec3, s_dot: &Vec3, params: &ForceParams) -> Vec3 {
    -(s - p) * params.kappa - s_dot * params.tau
}

/// Shell containing distance `r`: `[σ, ∞)` no snap, `[ε, σ)` snap, `[0, ε)` buffer.
pub fn snap_zone(r: f64, params: &ForceParams) -> Zone {
    if r >= params.sigma {
        Zone::NoSnap
    } else if r >= params.buffer_eps {
        Zone::Snap
    } else {
        Zone::Buffer
    }
}

/// Snap force at distance `r` from the surface.
///
/// In the snap shell the force follows `dir_field` (the field's `−∇D`); in the
/// buffer shell it follows `−dir_normal`. The magnitude is always
/// `force_scale · profile(r/σ)`.
pub fn snap_force(
    r: f64,
    dir_field: Option<Vec3>,
    dir_normal: Option<Vec3>,
    params: &ForceParams,
) -> Result<Vec3, ForceError> {
    let zone = snap_zone(r, params);
    if zone == Zone::NoSnap {
        return Ok(Vec3::zeros());
    }
    let magnitude = params.force_scale * params.profile(r / params.sigma);
    let dir = match zone {
        Zone::Snap => dir_field,
        _ => dir_normal.map(|n| -n),
    }
    .ok_or(ForceError::NoDirection)?;
    Ok(dir * magnitude)
}

/// Depth below a flat surface where the snap pull at contact balances the
/// spring: `force_scale · profile(0) / κ`.
pub fn equilibrium_depth(params: &ForceParams) -> f64 {
    params.force_scale * params.profile(0.0) / params.kappa
}

/// One row of a sampled profile table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    pub f_decay: f64,
    pub f_mag: f64,
}

/// Both profiles on `samples` uniformly spaced points of `[0, 1]`.
pub fn profile_table(a: f64, b: f64, samples: usize) -> Result<Vec<ProfileRow>, ForceError> {
    if samples < 2 {
        return Err(ForceError::InvalidParams(
            "samples must be at least 2".into(),
        ));
    }
    if !(a.is_finite() && a >= 0.0) {
        return Err(ForceError::InvalidParams(format!("amplitude_A {a}")));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(ForceError::InvalidParams(format!("decay_B {b}")));
    }
    Ok((0..samples)
        .map(|i| {
            let x = i as f64 / (samples - 1) as f64;
            ProfileRow {
                x,
                f_decay: f_decay(x, a, b),
                f_mag: f_mag(x),
            }
        })
        .collect())
}

/// CSV with header `x,f_decay,f_mag`.
pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("x,f_decay,f_mag\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.x, r.f_decay, r.f_mag);
    }
    out
}

/// Force components acting on the stylus in one frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub f_spring: Vec3,
    pub f_snap: Vec3,
    pub total: Vec3,
    pub zone: Zone,
}

impl ForceSample {
    pub fn new(f_spring: Vec3, f_snap: Vec3, zone: Zone) -> Self {
        Self {
            f_spring,
            f_snap,
            total: f_spring + f_snap,
            zone,
        }
    }

    pub fn zero(zone: Zone) -> Self {
        Self::new(Vec3::zeros(), Vec3::zeros(), zone)
    }
}
