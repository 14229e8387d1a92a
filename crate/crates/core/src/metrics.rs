//! Curve and localization measures.
//!
//! Curve quality compares distance images: `D_G` is the distance to the
//! band's medial axis and `D_X` the distance to the brushed texels. Both
//! measures only look at texels inside the band ℬ.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brushing::Mask;
use crate::surfacegen::{TriMesh, ValueScale};
use crate::Vec3;

/// Relative error bound of the localization filter.
pub const RELATIVE_ERROR_CUTOFF: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("mask has no foreground texels")]
    EmptyForeground,
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("band has {0} texels; need at least {1}")]
    BandTooSmall(usize, usize),
    #[error("ground truth is zero")]
    ZeroTruth,
}

/// Per-texel Euclidean distance to the nearest foreground texel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl DistanceImage {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width + i]
    }
}

/// 1D squared distance transform of a sampled function (lower envelope of
/// parabolas). `f` holds 0 on foreground and infinity elsewhere on the first
/// pass.
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    let mut first = None;
    for (q, &fq) in f.iter().enumerate() {
        if fq.is_finite() {
            first = Some(q);
            break;
        }
    }
    let Some(start) = first else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = start;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in start + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s =
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0 and the new parabola dominates from -inf.
                v[0] = q;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact Euclidean distance transform: separable row and column passes of
/// the squared transform, then a square root.
pub fn edt(mask: &Mask) -> Result<DistanceImage, MetricsError> {
    if mask.is_empty() {
        return Err(MetricsError::EmptyForeground);
    }
    let (w, h) = (mask.width, mask.height);
    let n = w.max(h);
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut col = vec![0f64; h];
    let mut col_out = vec![0f64; h];
    let mut sq = vec![0f64; w * h];
    for i in 0..w {
        for j in 0..h {
            col[j] = if mask.get(i, j) { 0.0 } else { f64::INFINITY };
        }
        dt_1d(&col, &mut col_out, &mut v, &mut z);
        for j in 0..h {
            sq[j * w + i] = col_out[j];
        }
    }
    let mut row_out = vec![0f64; w];
    for j in 0..h {
        let row = &sq[j * w..(j + 1) * w];
        dt_1d(row, &mut row_out, &mut v, &mut z);
        sq[j * w..(j + 1) * w].copy_from_slice(&row_out);
    }
    Ok(DistanceImage {
        width: w,
        height: h,
        values: sq.into_iter().map(f64::sqrt).collect(),
    })
}

/// Texel coordinates of a band region ℬ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TexelSet {
    pub width: usize,
    pub height: usize,
    pub texels: Vec<(usize, usize)>,
    members: Vec<bool>,
}

impl TexelSet {
    pub fn from_mask(mask: &Mask) -> Self {
        Self {
            width: mask.width,
            height: mask.height,
            texels: mask.tagged().collect(),
            members: mask.tags.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.texels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texels.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.width && j < self.height && self.members[j * self.width + i]
    }
}

fn check_dims(d: &DistanceImage, band: &TexelSet) -> Result<(), MetricsError> {
    if (d.width, d.height) != (band.width, band.height) {
        return Err(MetricsError::DimensionMismatch(
            d.width,
            d.height,
            band.width,
            band.height,
        ));
    }
    Ok(())
}

/// RMSE of `D_G − D_X` over the band.
pub fn curve_deviation(
    d_ref: &DistanceImage,
    d_brush: &DistanceImage,
    band: &TexelSet,
) -> Result<f64, MetricsError> {
    check_dims(d_ref, band)?;
    check_dims(d_brush, band)?;
    if band.is_empty() {
        return Err(MetricsError::BandTooSmall(0, 1));
    }
    let sum: f64 = band
        .texels
        .iter()
        .map(|&(i, j)| {
            let e = d_ref.get(i, j) - d_brush.get(i, j);
            e * e
        })
        .sum();
    Ok((sum / band.len() as f64).sqrt())
}

/// 5-point Laplacian of `d` at every band texel. Neighbours outside the band
/// (or the image) take the centre value.
pub fn band_laplacian(d: &DistanceImage, band: &TexelSet) -> Result<Vec<f64>, MetricsError> {
    check_dims(d, band)?;
    Ok(band
        .texels
        .iter()
        .map(|&(i, j)| {
            let c = d.get(i, j);
            let at = |di: i64, dj: i64| {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni >= 0 && nj >= 0 && band.contains(ni as usize, nj as usize) {
                    d.get(ni as usize, nj as usize)
                } else {
                    c
                }
            };
            at(1, 0) + at(-1, 0) + at(0, 1) + at(0, -1) - 4.0 * c
        })
        .collect())
}

/// Population standard deviation of the band Laplacian of `D_X`.
pub fn curve_irregularity(d_brush: &DistanceImage, band: &TexelSet) -> Result<f64, MetricsError> {
    if band.len() < 2 {
        return Err(MetricsError::BandTooSmall(band.len(), 2));
    }
    let lap = band_laplacian(d_brush, band)?;
    let n = lap.len() as f64;
    let mean = lap.iter().sum::<f64>() / n;
    let var = lap.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
    Ok(var.sqrt())
}

/// `|measured − truth| / |truth|`.
pub fn localization_error(measured: f64, truth: f64) -> Result<f64, MetricsError> {
    if truth == 0.0 {
        return Err(MetricsError::ZeroTruth);
    }
    Ok((measured - truth).abs() / truth.abs())
}

/// Keeps relative errors no larger than [`RELATIVE_ERROR_CUTOFF`].
pub fn filter_5pct(errors: &[f64]) -> Vec<f64> {
    errors
        .iter()
        .copied()
        .filter(|&e| e <= RELATIVE_ERROR_CUTOFF)
        .collect()
}

/// Scale taking elevations above the mesh's lowest point onto `display`.
pub fn protrusion_scale(mesh: &TriMesh, display: [f64; 2]) -> ValueScale {
    let (lo, hi) = mesh.aabb();
    ValueScale {
        source: [0.0, hi.z - lo.z],
        display,
    }
}

/// Height of `point` above the mesh's lowest point, scaled.
pub fn protrusion_value(mesh: &TriMesh, point: &Vec3, scale: &ValueScale) -> f64 {
    let (lo, _) = mesh.aabb();
    scale.apply(point.z - lo.z)
}

/// Distance of `point` from a reference centre, scaled.
pub fn depression_value(center: &Vec3, point: &Vec3, scale: &ValueScale) -> f64 {
    scale.apply((point - center).norm())
}
