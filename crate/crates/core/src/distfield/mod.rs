//! Voxelized unsigned distance to a mesh, plus exact nearest-point queries.
//!
//! The field stores the exact point-to-mesh distance at every grid node of a
//! box enclosing the mesh. Queries interpolate trilinearly; directions come
//! from central differences of the interpolated field.

mod bvh;
mod cache;
pub mod geometry;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surfacegen::TriMesh;
use crate::Vec3;

pub use bvh::{Bvh, Closest, RayHit};
pub use cache::{read_field, write_field, FIELD_MAGIC};

/// Scale applied to the mesh bounding box to obtain the field volume.
pub const BOX_SCALE: f64 = 1.4;
/// Default voxel count along the longest axis of the field volume.
pub const DEFAULT_RESOLUTION: usize = 64;
/// Every half-extent of the field volume is at least this fraction of the
/// longest scaled half-extent, so flat surfaces get room above and below.
pub const MIN_HALF_EXTENT_RATIO: f64 = 0.5;

#[derive(Debug, Error)]
pub enum DistfieldError {
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("resolution {0} is below the minimum of 8")]
    ResolutionTooLow(usize),
    #[error("query point is outside the field")]
    OutsideField,
    #[error("distance gradient vanishes; direction is ambiguous")]
    AmbiguousDirection,
    #[error("bad field cache: {0}")]
    BadCache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Closest point on the surface to a query.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceHit {
    pub point: Vec3,
    /// Unit vertex normal interpolated at the closest point.
    pub normal: Vec3,
    pub distance: f64,
    pub triangle: usize,
    pub barycentric: [f64; 3],
}

/// A mesh paired with its BVH. Cheap to clone; shared read-only.
#[derive(Clone, Debug)]
pub struct SurfaceIndex {
    inner: Arc<(TriMesh, Bvh)>,
}

impl SurfaceIndex {
    pub fn new(mesh: TriMesh) -> Self {
        let bvh = Bvh::build(&mesh);
        Self {
            inner: Arc::new((mesh, bvh)),
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.inner.0
    }

    pub fn bvh(&self) -> &Bvh {
        &self.inner.1
    }

    /// Exact nearest surface point; `None` only for an empty mesh.
    pub fn nearest(&self, p: &Vec3) -> Option<SurfaceHit> {
        let mesh = self.mesh();
        let c = self.bvh().closest(mesh, p)?;
        Some(SurfaceHit {
            point: c.point,
            normal: interpolate_normal(mesh, c.triangle, &c.barycentric),
            distance: c.distance_sq.sqrt(),
            triangle: c.triangle,
            barycentric: c.barycentric,
        })
    }

    /// First surface crossing of `origin + t·dir` for `t ∈ [t_min, t_max]`.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> Option<RayHit> {
        self.bvh().raycast(self.mesh(), origin, dir, t_min, t_max)
    }

    /// UV coordinates at a barycentric location on a triangle.
    pub fn uv_at(&self, triangle: usize, bary: &[f64; 3]) -> [f64; 2] {
        let mesh = self.mesh();
        let tri = mesh.triangles[triangle];
        let mut uv = [0.0; 2];
        for k in 0..3 {
            let t = mesh.uvs[tri[k]];
            uv[0] += bary[k] * t[0];
            uv[1] += bary[k] * t[1];
        }
        uv
    }
}

fn interpolate_normal(mesh: &TriMesh, triangle: usize, bary: &[f64; 3]) -> Vec3 {
    let tri = mesh.triangles[triangle];
    let n = mesh.normals[tri[0]] * bary[0]
        + mesh.normals[tri[1]] * bary[1]
        + mesh.normals[tri[2]] * bary[2];
    let len = n.norm();
    if len > 1e-12 {
        n / len
    } else {
        mesh.face_normal(triangle)
    }
}

/// Exact nearest point on the indexed mesh.
pub fn nearest_surface_point(index: &SurfaceIndex, point: &Vec3) -> SurfaceHit {
    index
        .nearest(point)
        .expect("SurfaceIndex over a non-empty mesh")
}

/// Unsigned distances sampled on a regular grid of nodes.
///
/// Node `(i, j, k)` sits at `origin + spacing·(i, j, k)`; values are stored
/// with `i` varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub dims: [usize; 3],
    pub origin: Vec3,
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl DistanceField {
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    /// Upper corner of the field volume.
    pub fn max_corner(&self) -> Vec3 {
        self.node(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let hi = self.max_corner();
        (0..3).all(|a| p[a] >= self.origin[a] && p[a] <= hi[a])
    }

    /// Trilinear interpolation of the eight surrounding node values.
    pub fn sample_distance(&self, p: &Vec3) -> Result<f64, DistfieldError> {
        let g = (p - self.origin) / self.spacing;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let n = self.dims[a];
            if !(g[a] >= 0.0 && g[a] <= (n - 1) as f64) {
                return Err(DistfieldError::OutsideField);
            }
            let i = (g[a].floor() as usize).min(n - 2);
            base[a] = i;
            frac[a] = g[a] - i as f64;
        }
        let [i, j, k] = base;
        let [tx, ty, tz] = frac;
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let c00 = lerp(self.value(i, j, k), self.value(i + 1, j, k), tx);
        let c10 = lerp(self.value(i, j + 1, k), self.value(i + 1, j + 1, k), tx);
        let c01 = lerp(self.value(i, j, k + 1), self.value(i + 1, j, k + 1), tx);
        let c11 = lerp(
            self.value(i, j + 1, k + 1),
            self.value(i + 1, j + 1, k + 1),
            tx,
        );
        Ok(lerp(lerp(c00, c10, ty), lerp(c01, c11, ty), tz))
    }

    /// Gradient threshold below which the direction is reported ambiguous.
    pub fn gradient_epsilon(&self) -> f64 {
        1e-6 * self.spacing
    }

    /// Central-difference gradient of the interpolated field, one-sided where
    /// a stencil point falls outside.
    pub fn gradient(&self, p: &Vec3) -> Result<Vec3, DistfieldError> {
        let center = self.sample_distance(p)?;
        let h = self.spacing;
        let mut grad = Vec3::zeros();
        for a in 0..3 {
            let mut e = Vec3::zeros();
            e[a] = h;
            let plus = self.sample_distance(&(p + e)).ok();
            let minus = self.sample_distance(&(p - e)).ok();
            grad[a] = match (plus, minus) {
                (Some(f), Some(b)) => (f - b) / (2.0 * h),
                (Some(f), None) => (f - center) / h,
                (None, Some(b)) => (center - b) / h,
                (None, None) => 0.0,
            };
        }
        Ok(grad)
    }

    /// Unit vector `−∇D / |∇D|`, pointing towards the surface.
    pub fn sample_direction(&self, p: &Vec3) -> Result<Vec3, DistfieldError> {
        let g = self.gradient(p)?;
        let len = g.norm();
        if len < self.gradient_epsilon() {
            return Err(DistfieldError::AmbiguousDirection);
        }
        Ok(-g / len)
    }
}

/// Field volume for a mesh: bounding box scaled by [`BOX_SCALE`] about its
/// centre, thin axes padded to [`MIN_HALF_EXTENT_RATIO`] of the longest, and
/// `resolution` nodes along the longest axis.
pub fn field_layout(mesh: &TriMesh, resolution: usize) -> ([usize; 3], Vec3, f64) {
    let (lo, hi) = mesh.aabb();
    let center = (lo + hi) * 0.5;
    let mut half = (hi - lo) * (0.5 * BOX_SCALE);
    let longest = half.max();
    let longest = if longest > 0.0 { longest } else { 1.0 };
    for a in 0..3 {
        half[a] = half[a].max(MIN_HALF_EXTENT_RATIO * longest);
    }
    let spacing = 2.0 * longest / (resolution - 1) as f64;
    let mut dims = [0usize; 3];
    let mut origin = Vec3::zeros();
    for a in 0..3 {
        dims[a] = ((2.0 * half[a] / spacing - 1e-9).ceil() as usize + 1).max(2);
        origin[a] = center[a] - spacing * (dims[a] - 1) as f64 / 2.0;
    }
    (dims, origin, spacing)
}

/// Exact per-node distances over the mesh's field volume.
pub fn build_distance_field(
    index: &SurfaceIndex,
    resolution: usize,
) -> Result<DistanceField, DistfieldError> {
    let mesh = index.mesh();
    if mesh.is_empty() {
        return Err(DistfieldError::EmptyMesh);
    }
    if resolution < 8 {
        return Err(DistfieldError::ResolutionTooLow(resolution));
    }
    let (dims, origin, spacing) = field_layout(mesh, resolution);
    let [nx, ny, nz] = dims;
    let values = (0..nx * ny * nz)
        .into_par_iter()
        .map(|idx| {
            let i = idx % nx;
            let j = (idx / nx) % ny;
            let k = idx / (nx * ny);
            let p = origin + Vec3::new(i as f64, j as f64, k as f64) * spacing;
            index
                .bvh()
                .closest(mesh, &p)
                .map(|c| c.distance_sq.sqrt())
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    Ok(DistanceField {
        dims,
        origin,
        spacing,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfacegen::{icosphere, plane};

    #[test]
    fn sphere_interior_distance() {
        let index = SurfaceIndex::new(icosphere(1.0, 3));
        let df = build_distance_field(&index, 32).unwrap();
        // Away from the centre, where the unsigned distance has a cusp.
        let d = df.sample_distance(&Vec3::new(0.0, 0.0, 0.5)).unwrap();
        assert!((d - 0.5).abs() < 0.02, "{d}");
    }

    #[test]
    fn layout_scales_box() {
        let mesh = icosphere(1.0, 1);
        let (dims, origin, spacing) = field_layout(&mesh, 64);
        assert_eq!(dims[0], 64);
        assert!((spacing - 2.8 / 63.0).abs() < 1e-12);
        assert!(origin[0] <= -1.4 + 1e-9);
    }

    #[test]
    fn flat_plane_gets_vertical_room() {
        let mesh = plane(1.0, 4);
        let (dims, origin, spacing) = field_layout(&mesh, 16);
        let top = origin.z + spacing * (dims[2] - 1) as f64;
        assert!(top >= 0.35 - 1e-9);
    }

    #[test]
    fn node_query_is_identity_and_midpoint_is_mean() {
        let index = SurfaceIndex::new(icosphere(1.0, 2));
        let df = build_distance_field(&index, 16).unwrap();
        for &(i, j, k) in &[(3, 4, 5), (0, 0, 0), (15, 15, 15), (7, 2, 9)] {
            assert_eq!(
                df.sample_distance(&df.node(i, j, k)).unwrap(),
                df.value(i, j, k)
            );
        }
        let mid = (df.node(5, 6, 7) + df.node(6, 6, 7)) * 0.5;
        let expect = 0.5 * (df.value(5, 6, 7) + df.value(6, 6, 7));
        assert!((df.sample_distance(&mid).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn outside_is_signalled() {
        let index = SurfaceIndex::new(icosphere(1.0, 1));
        let df = build_distance_field(&index, 8).unwrap();
        assert!(matches!(
            df.sample_distance(&Vec3::new(5.0, 0.0, 0.0)),
            Err(DistfieldError::OutsideField)
        ));
        assert!(matches!(
            df.sample_direction(&Vec3::new(0.0, -9.0, 0.0)),
            Err(DistfieldError::OutsideField)
        ));
    }

    #[test]
    fn direction_above_plane_points_down() {
        let index = SurfaceIndex::new(plane(1.0, 8));
        let df = build_distance_field(&index, 32).unwrap();
        let dir = df.sample_direction(&Vec3::new(0.1, -0.05, 0.2)).unwrap();
        assert!((dir - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-3, "{dir}");
    }

    #[test]
    fn direction_outside_sphere_is_radial() {
        let index = SurfaceIndex::new(icosphere(0.5, 3));
        let df = build_distance_field(&index, 48).unwrap();
        let dir = df.sample_direction(&Vec3::new(0.0, 0.0, 0.65)).unwrap();
        assert!((dir - Vec3::new(0.0, 0.0, -1.0)).norm() < 2e-2, "{dir}");
    }

    #[test]
    fn ambiguous_direction_at_sphere_centre() {
        let index = SurfaceIndex::new(icosphere(1.0, 2));
        let mut df = build_distance_field(&index, 9).unwrap();
        // Symmetric values around the centre node give a zero gradient.
        df.values.iter_mut().for_each(|v| *v = 1.0);
        assert!(matches!(
            df.sample_direction(&Vec3::zeros()),
            Err(DistfieldError::AmbiguousDirection)
        ));
    }

    #[test]
    fn empty_and_coarse_rejected() {
        let empty = SurfaceIndex::new(TriMesh::default());
        assert!(matches!(
            build_distance_field(&empty, 16),
            Err(DistfieldError::EmptyMesh)
        ));
        let index = SurfaceIndex::new(icosphere(1.0, 0));
        assert!(matches!(
            build_distance_field(&index, 4),
            Err(DistfieldError::ResolutionTooLow(4))
        ));
    }

    #[test]
    fn vertex_query_returns_vertex() {
        let mesh = icosphere(1.0, 2);
        let index = SurfaceIndex::new(mesh.clone());
        for v in mesh.vertices.iter().step_by(7) {
            let hit = nearest_surface_point(&index, v);
            assert!(hit.distance < 1e-12);
            assert!((hit.point - v).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_query_is_perpendicular_foot() {
        let index = SurfaceIndex::new(plane(2.0, 10));
        let hit = nearest_surface_point(&index, &Vec3::new(0.33, -0.21, 0.4));
        assert!((hit.point - Vec3::new(0.33, -0.21, 0.0)).norm() < 1e-12);
        assert!((hit.distance - 0.4).abs() < 1e-12);
        assert!((hit.normal - Vec3::z()).norm() < 1e-12);
    }
}
