use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SurfaceError;

/// Number of contour bands (colours) a scalar texture is displayed with.
pub const CONTOUR_BANDS: usize = 7;

/// One anisotropic Gaussian. Mean and covariance are in normalised texture
/// coordinates (`u, v ∈ [0,1]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: [f64; 2],
    /// Symmetric 2x2 covariance `[[s_uu, s_uv], [s_uv, s_vv]]`.
    pub covariance: [[f64; 2]; 2],
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub components: Vec<GaussianComponent>,
}

impl GaussianMixtureSpec {
    /// `n` components with random means, variances and orientations.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let components = (0..n)
            .map(|_| {
                let mean = [rng.random_range(0.15..0.85), rng.random_range(0.15..0.85)];
                let s1: f64 = rng.random_range(0.04..0.18);
                let s2: f64 = rng.random_range(0.04..0.18);
                let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
                let (c, s) = (angle.cos(), angle.sin());
                let (v1, v2) = (s1 * s1, s2 * s2);
                let covariance = [
                    [c * c * v1 + s * s * v2, c * s * (v1 - v2)],
                    [c * s * (v1 - v2), s * s * v1 + c * c * v2],
                ];
                GaussianComponent {
                    mean,
                    covariance,
                    amplitude: rng.random_range(0.3..1.0),
                }
            })
            .collect();
        Self { components }
    }

    /// Mixture value at normalised coordinates.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.components
            .iter()
            .map(|c| component_value(c, u, v))
            .sum()
    }
}

fn component_value(c: &GaussianComponent, u: f64, v: f64) -> f64 {
    let [[a, b], [_, d]] = c.covariance;
    let det = a * d - b * b;
    let du = u - c.mean[0];
    let dv = v - c.mean[1];
    // inverse of [[a,b],[b,d]] is [[d,-b],[-b,a]] / det
    let q = (d * du * du - 2.0 * b * du * dv + a * dv * dv) / det;
    c.amplitude * (-0.5 * q).exp()
}

/// Scalar function sampled at texel centres with seven display bands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarTexture {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    /// Lower thresholds of the seven bands: `min + k·(max−min)/7`, `k = 0..7`.
    pub contour_levels: [f64; CONTOUR_BANDS],
}

impl ScalarTexture {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width + i]
    }

    /// Contour band index `0..7` of a value; band 6 holds the maximum.
    pub fn band_of(&self, value: f64) -> usize {
        self.contour_levels
            .iter()
            .rposition(|&t| value >= t)
            .unwrap_or(0)
    }

    /// Texel of the largest value (first in row-major order on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        (best % self.width, best / self.width)
    }
}

/// Samples a Gaussian mixture on a `width × height` texel grid.
pub fn gen_scalar_texture(
    spec: &GaussianMixtureSpec,
    width: usize,
    height: usize,
) -> Result<ScalarTexture, SurfaceError> {
    if spec.components.is_empty() {
        return Err(SurfaceError::EmptyMixture);
    }
    if width == 0 || height == 0 {
        return Err(SurfaceError::BadDimensions(width, height));
    }
    for (k, c) in spec.components.iter().enumerate() {
        let [[a, b], [b2, d]] = c.covariance;
        let finite = [a, b, b2, d, c.amplitude, c.mean[0], c.mean[1]]
            .iter()
            .all(|x| x.is_finite());
        if !finite
            || a <= 0.0
            || (b - b2).abs() > 1e-12 * (a.abs() + d.abs())
            || a * d - b * b <= 0.0
        {
            return Err(SurfaceError::DegenerateCovariance(k));
        }
    }
    let mut values = Vec::with_capacity(width * height);
    for j in 0..height {
        let v = (j as f64 + 0.5) / height as f64;
        for i in 0..width {
            let u = (i as f64 + 0.5) / width as f64;
            values.push(spec.eval(u, v));
        }
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
            (l.min(x), h.max(x))
        });
    let step = (hi - lo) / CONTOUR_BANDS as f64;
    let mut contour_levels = [0.0; CONTOUR_BANDS];
    for (k, level) in contour_levels.iter_mut().enumerate() {
        *level = lo + k as f64 * step;
    }
    Ok(ScalarTexture {
        width,
        height,
        values,
        contour_levels,
    })
}

/// Affine map from a source interval onto a display interval, used to show
/// elevations and function values in a realistic numeric range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueScale {
    pub source: [f64; 2],
    pub display: [f64; 2],
}

impl ValueScale {
    /// Maps `[lo, hi]` onto the default display range `[0, 1000]`.
    pub fn to_default_range(lo: f64, hi: f64) -> Self {
        Self {
            source: [lo, hi],
            display: [0.0, 1000.0],
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        let span = self.source[1] - self.source[0];
        if span == 0.0 {
            return self.display[0];
        }
        self.display[0] + (x - self.source[0]) / span * (self.display[1] - self.display[0])
    }
}
