use serde::{Deserialize, Serialize};

use super::perlin::Perlin;
use super::SurfaceError;

/// Regular grid of elevations, row-major with `x` varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub width: usize,
    pub height: usize,
    pub elevations: Vec<f64>,
    /// World units per texel.
    pub cell_size: f64,
}

impl HeightField {
    pub fn new(
        width: usize,
        height: usize,
        cell_size: f64,
        elevations: Vec<f64>,
    ) -> Result<Self, SurfaceError> {
        if width < 2 || height < 2 || elevations.len() != width * height {
            return Err(SurfaceError::EmptyHeightField);
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(SurfaceError::InvalidSpec(format!("cell_size {cell_size}")));
        }
        if elevations.iter().any(|e| !e.is_finite()) {
            return Err(SurfaceError::InvalidSpec("non-finite elevation".into()));
        }
        Ok(Self {
            width,
            height,
            elevations,
            cell_size,
        })
    }

    pub fn flat(width: usize, height: usize, cell_size: f64, z: f64) -> Self {
        Self {
            width,
            height,
            elevations: vec![z; width * height],
            cell_size,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.elevations[j * self.width + i]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.elevations
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
                (lo.min(e), hi.max(e))
            })
    }

    /// Bilinear elevation at fractional texel coordinates, clamped to the grid.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let i0 = (x.floor() as usize).min(self.width - 2);
        let j0 = (y.floor() as usize).min(self.height - 2);
        let tx = x - i0 as f64;
        let ty = y - j0 as f64;
        let a = self.get(i0, j0);
        let b = self.get(i0 + 1, j0);
        let c = self.get(i0, j0 + 1);
        let d = self.get(i0 + 1, j0 + 1);
        // Weighted form so that whole-number coordinates return samples exactly.
        let top = a * (1.0 - tx) + b * tx;
        let bottom = c * (1.0 - tx) + d * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

/// One weighted layer of a procedural height field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    #[serde(flatten)]
    pub kind: LayerKind,
    /// Defaults to 1 when omitted.
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

/// Layer generators. Coordinates `u, v` run over `[0,1]` across the field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerKind {
    /// `amplitude * fbm(frequency * (u, v))`.
    Perlin {
        frequency: f64,
        #[serde(default = "one_octave")]
        octaves: u32,
        #[serde(default = "half")]
        persistence: f64,
        amplitude: f64,
    },
    /// Anisotropic Gaussian bump centred at `center` (in `u, v`), axes
    /// rotated by `rotation` radians.
    Gaussian2d {
        center: [f64; 2],
        sigma: [f64; 2],
        #[serde(default)]
        rotation: f64,
        amplitude: f64,
    },
    /// `amplitude * cos(2π (fu·u + fv·v) + phase)`.
    Sinusoid {
        frequency: [f64; 2],
        #[serde(default)]
        phase: f64,
        amplitude: f64,
    },
}

fn one_octave() -> u32 {
    1
}

fn half() -> f64 {
    0.5
}

const KNOWN_KINDS: [&str; 3] = ["perlin", "gaussian2d", "sinusoid"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightFieldSpec {
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    #[serde(default = "unit_cell")]
    pub cell_size: f64,
}

fn unit_cell() -> f64 {
    1.0
}

impl HeightFieldSpec {
    /// Parses a JSON spec, reporting unrecognised layer kinds by name.
    pub fn from_json(text: &str) -> Result<Self, SurfaceError> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        if let Some(layers) = raw.get("layers").and_then(|l| l.as_array()) {
            for layer in layers {
                match layer.get("kind").and_then(|k| k.as_str()) {
                    Some(kind) if KNOWN_KINDS.contains(&kind) => {}
                    Some(kind) => return Err(SurfaceError::UnknownLayerKind(kind.to_string())),
                    None => return Err(SurfaceError::InvalidSpec("layer without `kind`".into())),
                }
            }
        }
        Ok(serde_json::from_value(raw)?)
    }

    fn validate(&self) -> Result<(), SurfaceError> {
        if self.layers.is_empty() {
            return Err(SurfaceError::InvalidSpec(
                "at least one layer is required".into(),
            ));
        }
        if self.width < 2 || self.height < 2 {
            return Err(SurfaceError::EmptyHeightField);
        }
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return Err(SurfaceError::InvalidSpec(format!(
                "cell_size {}",
                self.cell_size
            )));
        }
        for (idx, layer) in self.layers.iter().enumerate() {
            let bad = |name| Err(SurfaceError::NonFiniteParameter { layer: idx, name });
            if !layer.weight.is_finite() {
                return bad("weight");
            }
            match &layer.kind {
                LayerKind::Perlin {
                    frequency,
                    persistence,
                    amplitude,
                    ..
                } => {
                    if !frequency.is_finite() {
                        return bad("frequency");
                    }
                    if !persistence.is_finite() {
                        return bad("persistence");
                    }
                    if !amplitude.is_finite() {
                        return bad("amplitude");
                    }
                }
                LayerKind::Gaussian2d {
                    center,
                    sigma,
                    rotation,
                    amplitude,
                } => {
                    if !center.iter().all(|c| c.is_finite()) {
                        return bad("center");
                    }
                    if !sigma.iter().all(|s| s.is_finite()) {
                        return bad("sigma");
                    }
                    if sigma.iter().any(|&s| s <= 0.0) {
                        return Err(SurfaceError::InvalidSpec(format!(
                            "layer {idx}: sigma must be positive"
                        )));
                    }
                    if !rotation.is_finite() {
                        return bad("rotation");
                    }
                    if !amplitude.is_finite() {
                        return bad("amplitude");
                    }
                }
                LayerKind::Sinusoid {
                    frequency,
                    phase,
                    amplitude,
                } => {
                    if !frequency.iter().all(|f| f.is_finite()) {
                        return bad("frequency");
                    }
                    if !phase.is_finite() {
                        return bad("phase");
                    }
                    if !amplitude.is_finite() {
                        return bad("amplitude");
                    }
                }
            }
        }
        Ok(())
    }
}

enum Generator {
    Perlin {
        noise: Perlin,
        frequency: f64,
        octaves: u32,
        persistence: f64,
        amplitude: f64,
    },
    Gaussian {
        center: [f64; 2],
        inv_sigma: [f64; 2],
        cos: f64,
        sin: f64,
        amplitude: f64,
    },
    Sinusoid {
        frequency: [f64; 2],
        phase: f64,
        amplitude: f64,
    },
}

impl Generator {
    fn new(kind: &LayerKind, seed: u64, index: usize) -> Self {
        match *kind {
            LayerKind::Perlin {
                frequency,
                octaves,
                persistence,
                amplitude,
            } => Generator::Perlin {
                // Distinct permutation per layer so stacked noise layers decorrelate.
                noise: Perlin::new(
                    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add(index as u64),
                ),
                frequency,
                octaves: octaves.max(1),
                persistence,
                amplitude,
            },
            LayerKind::Gaussian2d {
                center,
                sigma,
                rotation,
                amplitude,
            } => Generator::Gaussian {
                center,
                inv_sigma: [1.0 / sigma[0], 1.0 / sigma[1]],
                cos: rotation.cos(),
                sin: rotation.sin(),
                amplitude,
            },
            LayerKind::Sinusoid {
                frequency,
                phase,
                amplitude,
            } => Generator::Sinusoid {
                frequency,
                phase,
                amplitude,
            },
        }
    }

    fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            Generator::Perlin {
                noise,
                frequency,
                octaves,
                persistence,
                amplitude,
            } => amplitude * noise.fbm(u * frequency, v * frequency, *octaves, *persistence),
            Generator::Gaussian {
                center,
                inv_sigma,
                cos,
                sin,
                amplitude,
            } => {
                let du = u - center[0];
                let dv = v - center[1];
                let a = (cos * du + sin * dv) * inv_sigma[0];
                let b = (-sin * du + cos * dv) * inv_sigma[1];
                amplitude * (-0.5 * (a * a + b * b)).exp()
            }
            Generator::Sinusoid {
                frequency,
                phase,
                amplitude,
            } => {
                let arg = std::f64::consts::TAU * (frequency[0] * u + frequency[1] * v) + phase;
                amplitude * arg.cos()
            }
        }
    }
}

/// Evaluates the weighted layer blend on the spec's grid.
pub fn gen_heightfield(spec: &HeightFieldSpec) -> Result<HeightField, SurfaceError> {
    spec.validate()?;
    let gens: Vec<(Generator, f64)> = spec
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| (Generator::new(&l.kind, spec.seed, i), l.weight))
        .collect();
    let (w, h) = (spec.width, spec.height);
    let mut elevations = Vec::with_capacity(w * h);
    for j in 0..h {
        let v = j as f64 / (h - 1) as f64;
        for i in 0..w {
            let u = i as f64 / (w - 1) as f64;
            elevations.push(gens.iter().map(|(g, wt)| wt * g.eval(u, v)).sum());
        }
    }
    HeightField::new(w, h, spec.cell_size, elevations)
}
