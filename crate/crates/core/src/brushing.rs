//! Band textures and brushed-curve recording in UV space.
//!
//! UV `(u, v)` maps to continuous texel coordinates `(u·W, v·H)`; texel
//! `(i, j)` covers the half-open square `[i, i+1) × [j, j+1)` and its centre
//! is `(i + ½, j + ½)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distfield::SurfaceIndex;
use crate::simulator::TrialLog;

#[derive(Debug, Error, PartialEq)]
pub enum BrushError {
    #[error("polyline needs at least one point")]
    EmptyPolyline,
    #[error("polyline point {0} lies outside [0,1]²")]
    PolylineOutside(usize),
    #[error("half_width must be at least 1 texel, got {0}")]
    BadHalfWidth(f64),
    #[error("texture dimensions must be positive")]
    BadDims,
}

/// A band around a medial polyline, in UV space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub polyline: Vec<[f64; 2]>,
    /// Band half-width in texels.
    pub half_width: f64,
    pub width: usize,
    pub height: usize,
}

impl BandSpec {
    pub fn validate(&self) -> Result<(), BrushError> {
        if self.width == 0 || self.height == 0 {
            return Err(BrushError::BadDims);
        }
        if self.polyline.is_empty() {
            return Err(BrushError::EmptyPolyline);
        }
        if let Some(i) = self
            .polyline
            .iter()
            .position(|p| !p.iter().all(|c| (0.0..=1.0).contains(c)))
        {
            return Err(BrushError::PolylineOutside(i));
        }
        if !(self.half_width >= 1.0) {
            return Err(BrushError::BadHalfWidth(self.half_width));
        }
        Ok(())
    }

    fn texel_points(&self) -> Vec<[f64; 2]> {
        self.polyline
            .iter()
            .map(|p| [p[0] * self.width as f64, p[1] * self.height as f64])
            .collect()
    }
}

/// Boolean texel grid stored row by row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub tags: Vec<bool>,
}

/// Texels tagged by brushing.
pub type BrushTexture = Mask;

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            tags: vec![false; width * height],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.tags[j * self.width + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.tags[j * self.width + i] = value;
    }

    pub fn count(&self) -> usize {
        self.tags.iter().filter(|&&t| t).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.tags.iter().any(|&t| t)
    }

    /// Coordinates `(i, j)` of tagged texels in row-major order.
    pub fn tagged(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(k, _)| (k % self.width, k / self.width))
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.tags.iter().zip(&other.tags).all(|(&a, &b)| !a || b)
    }
}

fn texel_of(x: f64, n: usize) -> usize {
    (x.floor().max(0.0) as usize).min(n - 1)
}

fn dist_point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
    (qx * qx + qy * qy).sqrt()
}

/// Euclidean distance in texels from `p` to a polyline.
pub fn dist_to_polyline(p: [f64; 2], pts: &[[f64; 2]]) -> f64 {
    match pts {
        [] => f64::INFINITY,
        [a] => dist_point_segment(p, *a, *a),
        _ => pts
            .windows(2)
            .map(|w| dist_point_segment(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Thin 8-connected line: one texel per column (or row, for steep
/// segments), taken where the segment crosses that texel's centre line.
fn raster_thin(a: [f64; 2], b: [f64; 2], mask: &mut Mask) {
    let steep = (b[1] - a[1]).abs() > (b[0] - a[0]).abs();
    let (major, minor) = if steep { (1, 0) } else { (0, 1) };
    let dims = [mask.width, mask.height];
    let (lo, hi) = if a[major] <= b[major] { (a, b) } else { (b, a) };
    let first = texel_of(lo[major], dims[major]);
    let last = texel_of(hi[major], dims[major]);
    for k in first..=last {
        let x = (k as f64 + 0.5).clamp(lo[major], hi[major]);
        let span = hi[major] - lo[major];
        let y = if span > 0.0 {
            lo[minor] + (hi[minor] - lo[minor]) * (x - lo[major]) / span
        } else {
            lo[minor]
        };
        let m = texel_of(y, dims[minor]);
        if steep {
            mask.set(m, k, true);
        } else {
            mask.set(k, m, true);
        }
    }
}

/// Band mask and medial-axis mask of a band spec.
///
/// The band holds every texel whose centre lies within `half_width` of the
/// polyline; the medial axis is a one-texel-wide 8-connected rasterization.
pub fn make_band_texture(spec: &BandSpec) -> Result<(Mask, Mask), BrushError> {
    spec.validate()?;
    let pts = spec.texel_points();
    let mut band = Mask::new(spec.width, spec.height);
    for j in 0..spec.height {
        for i in 0..spec.width {
            let c = [i as f64 + 0.5, j as f64 + 0.5];
            if dist_to_polyline(c, &pts) <= spec.half_width {
                band.set(i, j, true);
            }
        }
    }
    let mut medial = Mask::new(spec.width, spec.height);
    if pts.len() == 1 {
        raster_thin(pts[0], pts[0], &mut medial);
    }
    for w in pts.windows(2) {
        raster_thin(w[0], w[1], &mut medial);
    }
    Ok((band, medial))
}

/// Visits every texel whose half-open square the segment `a → b` touches,
/// in order from `a`. Coordinates are in texels.
pub fn traverse_segment(
    a: [f64; 2],
    b: [f64; 2],
    width: usize,
    height: usize,
    mut visit: impl FnMut(usize, usize),
) {
    let dims = [width, height];
    let mut cell = [texel_of(a[0], width) as i64, texel_of(a[1], height) as i64];
    let end = [texel_of(b[0], width) as i64, texel_of(b[1], height) as i64];
    visit(cell[0] as usize, cell[1] as usize);

    let mut step = [0i64; 2];
    let mut t_max = [f64::INFINITY; 2];
    let mut t_delta = [f64::INFINITY; 2];
    for k in 0..2 {
        let d = b[k] - a[k];
        if d > 0.0 {
            step[k] = 1;
            t_max[k] = ((cell[k] + 1) as f64 - a[k]) / d;
            t_delta[k] = 1.0 / d;
        } else if d < 0.0 {
            step[k] = -1;
            t_max[k] = (cell[k] as f64 - a[k]) / d;
            t_delta[k] = -1.0 / d;
        }
    }
    let limit = width + height + 2;
    for _ in 0..limit {
        if cell == end {
            break;
        }
        let tx = if cell[0] == end[0] {
            f64::INFINITY
        } else {
            t_max[0]
        };
        let ty = if cell[1] == end[1] {
            f64::INFINITY
        } else {
            t_max[1]
        };
        let axes: &[usize] = if tx < ty {
            &[0]
        } else if ty < tx {
            &[1]
        } else if tx.is_finite() {
            // Through a corner: take both neighbours.
            &[0, 1]
        } else {
            break;
        };
        for &k in axes {
            cell[k] += step[k];
            t_max[k] += t_delta[k];
            if cell[k] < 0 || cell[k] >= dims[k] as i64 {
                return;
            }
            visit(cell[0] as usize, cell[1] as usize);
        }
    }
}

/// Tags (or, with `erase`, untags) every texel the UV segment touches.
pub fn brush_segment(tex: &mut BrushTexture, uv_prev: [f64; 2], uv_cur: [f64; 2], erase: bool) {
    let (w, h) = (tex.width as f64, tex.height as f64);
    let a = [uv_prev[0] * w, uv_prev[1] * h];
    let b = [uv_cur[0] * w, uv_cur[1] * h];
    traverse_segment(a, b, tex.width, tex.height, |i, j| tex.set(i, j, !erase));
}

/// Result of replaying the brushing frames of a log.
#[derive(Clone, Debug, PartialEq)]
pub struct BrushRecord {
    pub texture: BrushTexture,
    /// Frames with a button held but no surface under the pointer.
    pub skipped: usize,
}

/// Replays a log's brush and erase frames onto a texture.
///
/// Each frame's highlighted surface point is mapped to UV by barycentric
/// interpolation; consecutive frames of a stroke are joined by
/// [`brush_segment`]. A frame without a surface point is counted as skipped
/// and ends the stroke.
pub fn record_brush(
    log: &TrialLog,
    index: &SurfaceIndex,
    width: usize,
    height: usize,
) -> Result<BrushRecord, BrushError> {
    if width == 0 || height == 0 {
        return Err(BrushError::BadDims);
    }
    let mut texture = Mask::new(width, height);
    let mut skipped = 0;
    let mut prev: Option<([f64; 2], bool)> = None;
    for f in &log.frames {
        if !(f.brush || f.erase) {
            prev = None;
            continue;
        }
        let erase = f.erase && !f.brush;
        let Some(point) = f.highlight else {
            skipped += 1;
            prev = None;
            continue;
        };
        let Some(hit) = index.nearest(&point) else {
            skipped += 1;
            prev = None;
            continue;
        };
        let uv = index
            .uv_at(hit.triangle, &hit.barycentric)
            .map(|c| c.clamp(0.0, 1.0));
        let from = match prev {
            Some((p, e)) if e == erase => p,
            _ => uv,
        };
        brush_segment(&mut texture, from, uv, erase);
        prev = Some((uv, erase));
    }
    Ok(BrushRecord { texture, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_segment_tags_one_texel() {
        let mut t = Mask::new(10, 10);
        brush_segment(&mut t, [0.33, 0.71], [0.33, 0.71], false);
        assert_eq!(t.tagged().collect::<Vec<_>>(), vec![(3, 7)]);
    }

    #[test]
    fn horizontal_segment_on_texel_boundary() {
        let mut t = Mask::new(10, 10);
        brush_segment(&mut t, [0.1, 0.1], [0.5, 0.1], false);
        assert_eq!(
            t.tagged().collect::<Vec<_>>(),
            (1..=5).map(|i| (i, 1)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn erase_untags() {
        let mut t = Mask::new(10, 10);
        brush_segment(&mut t, [0.05, 0.5], [0.95, 0.5], false);
        assert_eq!(t.count(), 10);
        brush_segment(&mut t, [0.05, 0.5], [0.45, 0.5], true);
        assert_eq!(t.count(), 5);
    }

    #[test]
    fn band_strip_is_seven_tall() {
        let spec = BandSpec {
            polyline: vec![[0.25, 0.505], [0.75, 0.505]],
            half_width: 3.0,
            width: 100,
            height: 100,
        };
        let (band, medial) = make_band_texture(&spec).unwrap();
        let column: Vec<usize> = (0..100).filter(|&j| band.get(50, j)).collect();
        assert_eq!(column, (47..=53).collect::<Vec<_>>());
        assert!(medial.is_subset_of(&band));
        assert_eq!(medial.count(), 51);
    }

    #[test]
    fn band_spec_validation() {
        let ok = BandSpec {
            polyline: vec![[0.1, 0.1]],
            half_width: 1.0,
            width: 8,
            height: 8,
        };
        assert!(ok.validate().is_ok());
        let out = BandSpec {
            polyline: vec![[0.1, 0.1], [1.2, 0.1]],
            ..ok.clone()
        };
        assert_eq!(
            make_band_texture(&out).unwrap_err(),
            BrushError::PolylineOutside(1)
        );
        let thin = BandSpec {
            half_width: 0.5,
            ..ok
        };
        assert_eq!(thin.validate().unwrap_err(), BrushError::BadHalfWidth(0.5));
    }
}
