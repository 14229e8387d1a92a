use std::collections::HashMap;

use crate::Vec3;

use super::heightfield::HeightField;
use super::SurfaceError;

/// Indexed triangle mesh with per-vertex normals and UVs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub normals: Vec<Vec3>,
    pub uvs: Vec<[f64; 2]>,
}

/// A violated mesh invariant found by [`TriMesh::check`].
#[derive(Clone, Debug, PartialEq)]
pub enum MeshIssue {
    IndexOutOfRange { triangle: usize },
    DegenerateTriangle { triangle: usize },
    NonUnitNormal { vertex: usize },
    UvOutOfRange { vertex: usize },
    AttributeCountMismatch,
}

/// Newell's polygon normal. For a triangle its length is twice the area.
pub fn newell_normal(polygon: &[Vec3]) -> Vec3 {
    let mut n = Vec3::zeros();
    for (k, a) in polygon.iter().enumerate() {
        let b = polygon[(k + 1) % polygon.len()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    n
}

impl TriMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    #[inline]
    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unit geometric normal of triangle `t`.
    pub fn face_normal(&self, t: usize) -> Vec3 {
        let n = newell_normal(&self.corners(t));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::z()
        }
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * newell_normal(&self.corners(t)).norm()
    }

    pub fn aabb(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn aabb_diagonal(&self) -> f64 {
        let (lo, hi) = self.aabb();
        (hi - lo).norm()
    }

    /// Smooth vertex normals: incident unit Newell face normals weighted by
    /// the face's corner angle at the vertex.
    pub fn recompute_normals(&mut self) {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for t in 0..self.triangles.len() {
            let c = self.corners(t);
            let n = newell_normal(&c);
            let len = n.norm();
            if len == 0.0 {
                continue;
            }
            let n = n / len;
            for k in 0..3 {
                let e1 = c[(k + 1) % 3] - c[k];
                let e2 = c[(k + 2) % 3] - c[k];
                acc[self.triangles[t][k]] += n * e1.angle(&e2);
            }
        }
        self.normals = acc
            .into_iter()
            .map(|n| {
                let len = n.norm();
                if len > 0.0 {
                    n / len
                } else {
                    Vec3::z()
                }
            })
            .collect();
    }

    /// Planar UVs: project along the axis of smallest extent and normalise
    /// the remaining two axes to `[0,1]`.
    pub fn planar_uvs(&mut self) {
        let (lo, hi) = self.aabb();
        let ext = hi - lo;
        let drop = ext.imin();
        let (a, b) = match drop {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let norm = |x: f64, k: usize| {
            if ext[k] > 0.0 {
                (x - lo[k]) / ext[k]
            } else {
                0.0
            }
        };
        self.uvs = self
            .vertices
            .iter()
            .map(|v| [norm(v[a], a).clamp(0.0, 1.0), norm(v[b], b).clamp(0.0, 1.0)])
            .collect();
    }

    /// Lists invariant violations: index range, zero-area triangles,
    /// non-unit normals (tolerance 1e-6) and UVs outside `[0,1]²`.
    pub fn check(&self) -> Vec<MeshIssue> {
        let mut issues = Vec::new();
        let nv = self.vertices.len();
        if self.normals.len() != nv || self.uvs.len() != nv {
            issues.push(MeshIssue::AttributeCountMismatch);
        }
        let diag = self.aabb_diagonal();
        let min_area = 1e-14 * diag * diag;
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                issues.push(MeshIssue::IndexOutOfRange { triangle: t });
                continue;
            }
            if !(self.triangle_area(t) > min_area) {
                issues.push(MeshIssue::DegenerateTriangle { triangle: t });
            }
        }
        for (v, n) in self.normals.iter().enumerate() {
            if (n.norm() - 1.0).abs() > 1e-6 {
                issues.push(MeshIssue::NonUnitNormal { vertex: v });
            }
        }
        for (v, uv) in self.uvs.iter().enumerate() {
            if !uv.iter().all(|c| (0.0..=1.0).contains(c)) {
                issues.push(MeshIssue::UvOutOfRange { vertex: v });
            }
        }
        issues
    }

    /// Edges shared by more than two triangles.
    pub fn non_manifold_edges(&self) -> Vec<(usize, usize)> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut edges: Vec<_> = count
            .into_iter()
            .filter(|&(_, c)| c > 2)
            .map(|(e, _)| e)
            .collect();
        edges.sort_unstable();
        edges
    }
}

/// Upsamples `hf` bilinearly to `(w·f) × (h·f)` vertices spanning the same
/// extent and triangulates the grid.
///
/// Grid points are cocircular in every cell, so any consistent diagonal gives
/// a Delaunay triangulation; cells are always split along the `(i,j)-(i+1,j+1)`
/// diagonal with counter-clockwise winding seen from `+z`.
pub fn heightfield_to_mesh(
    hf: &HeightField,
    upsample_factor: usize,
) -> Result<TriMesh, SurfaceError> {
    if upsample_factor < 1 {
        return Err(SurfaceError::BadUpsampleFactor);
    }
    if hf.width < 2 || hf.height < 2 || hf.elevations.len() != hf.width * hf.height {
        return Err(SurfaceError::EmptyHeightField);
    }
    let nx = hf.width * upsample_factor;
    let ny = hf.height * upsample_factor;
    let sx = (hf.width - 1) as f64 / (nx - 1) as f64;
    let sy = (hf.height - 1) as f64 / (ny - 1) as f64;

    let mut vertices = Vec::with_capacity(nx * ny);
    let mut uvs = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = j as f64 * sy;
        for i in 0..nx {
            let x = i as f64 * sx;
            vertices.push(Vec3::new(
                x * hf.cell_size,
                y * hf.cell_size,
                hf.sample_bilinear(x, y),
            ));
            uvs.push([i as f64 / (nx - 1) as f64, j as f64 / (ny - 1) as f64]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v00 = j * nx + i;
            let v10 = v00 + 1;
            let v01 = v00 + nx;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut mesh = TriMesh {
        vertices,
        triangles,
        normals: Vec::new(),
        uvs,
    };
    mesh.recompute_normals();
    Ok(mesh)
}

/// Midpoint subdivision: each level splits every triangle into four. Shared
/// edges get a single midpoint vertex; normals are recomputed afterwards.
pub fn subdivide_midpoint(mesh: &TriMesh, levels: u32) -> TriMesh {
    let mut out = mesh.clone();
    for _ in 0..levels {
        let mut vertices = out.vertices.clone();
        let mut uvs = out.uvs.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint =
            |a: usize, b: usize, vertices: &mut Vec<Vec3>, uvs: &mut Vec<[f64; 2]>| {
                *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    vertices.push((vertices[a] + vertices[b]) * 0.5);
                    if uvs.len() + 1 == vertices.len() {
                        let (ua, ub) = (uvs[a], uvs[b]);
                        uvs.push([(ua[0] + ub[0]) * 0.5, (ua[1] + ub[1]) * 0.5]);
                    }
                    vertices.len() - 1
                })
            };
        let mut triangles = Vec::with_capacity(out.triangles.len() * 4);
        for &[a, b, c] in &out.triangles {
            let ab = midpoint(a, b, &mut vertices, &mut uvs);
            let bc = midpoint(b, c, &mut vertices, &mut uvs);
            let ca = midpoint(c, a, &mut vertices, &mut uvs);
            triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        out = TriMesh {
            vertices,
            triangles,
            normals: Vec::new(),
            uvs,
        };
    }
    out.recompute_normals();
    if out.uvs.len() != out.vertices.len() {
        out.planar_uvs();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> HeightField {
        let mut e = Vec::new();
        for j in 0..h {
            for i in 0..w {
                e.push(0.1 * i as f64 + 0.05 * (j * j) as f64);
            }
        }
        HeightField::new(w, h, 0.5, e).unwrap()
    }

    #[test]
    fn newell_matches_cross_product() {
        let a = Vec3::new(0.3, -1.0, 2.0);
        let b = Vec3::new(1.5, 0.2, -0.4);
        let c = Vec3::new(-0.7, 0.9, 0.1);
        let n = newell_normal(&[a, b, c]);
        let cross = (b - a).cross(&(c - a));
        assert!((n - cross).norm() < 1e-12);
    }

    #[test]
    fn hundred_grid_upsampled_twice() {
        let hf = HeightField::flat(100, 100, 1.0, 0.0);
        let mesh = heightfield_to_mesh(&hf, 2).unwrap();
        assert_eq!(mesh.vertices.len(), 40_000);
        assert_eq!(mesh.triangles.len(), 2 * 199 * 199);
    }

    #[test]
    fn flat_field_normals_point_up() {
        let mesh = heightfield_to_mesh(&HeightField::flat(7, 5, 0.3, 2.0), 3).unwrap();
        assert!(mesh.check().is_empty());
        for n in &mesh.normals {
            assert!((n - Vec3::z()).norm() < 1e-12);
        }
    }

    #[test]
    fn minimal_grid_two_triangles_same_winding() {
        let mesh = heightfield_to_mesh(&HeightField::flat(2, 2, 1.0, 0.0), 1).unwrap();
        assert_eq!(mesh.triangles.len(), 2);
        for t in 0..2 {
            assert!(mesh.face_normal(t).z > 0.999);
        }
    }

    #[test]
    fn upsampling_interpolates_coincident_points() {
        let hf = ramp(6, 4);
        for f in 1..5 {
            let mesh = heightfield_to_mesh(&hf, f).unwrap();
            let nx = hf.width * f;
            let ny = hf.height * f;
            for j in 0..ny {
                for i in 0..nx {
                    let x = (i * (hf.width - 1)) as f64 / (nx - 1) as f64;
                    let y = (j * (hf.height - 1)) as f64 / (ny - 1) as f64;
                    if x.fract() == 0.0 && y.fract() == 0.0 {
                        let z = mesh.vertices[j * nx + i].z;
                        assert!((z - hf.get(x as usize, y as usize)).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn grid_triangulation_is_delaunay() {
        // No vertex lies strictly inside any triangle's circumcircle (xy projection).
        let mesh = heightfield_to_mesh(&ramp(5, 4), 2).unwrap();
        for t in 0..mesh.triangles.len() {
            let [a, b, c] = mesh.corners(t);
            for p in &mesh.vertices {
                let m = nalgebra::Matrix3::new(
                    a.x - p.x,
                    a.y - p.y,
                    (a.x - p.x).powi(2) + (a.y - p.y).powi(2),
                    b.x - p.x,
                    b.y - p.y,
                    (b.x - p.x).powi(2) + (b.y - p.y).powi(2),
                    c.x - p.x,
                    c.y - p.y,
                    (c.x - p.x).powi(2) + (c.y - p.y).powi(2),
                );
                assert!(m.determinant() <= 1e-9, "vertex inside circumcircle of {t}");
            }
        }
    }

    #[test]
    fn rejects_zero_factor() {
        assert!(matches!(
            heightfield_to_mesh(&ramp(3, 3), 0),
            Err(SurfaceError::BadUpsampleFactor)
        ));
    }

    #[test]
    fn subdivision_quadruples() {
        let mesh = heightfield_to_mesh(&ramp(3, 3), 1).unwrap();
        let fine = subdivide_midpoint(&mesh, 1);
        assert_eq!(fine.triangles.len(), 4 * mesh.triangles.len());
        // 3x3 grid has 16 edges -> 9 + 16 vertices
        assert_eq!(fine.vertices.len(), 25);
        assert!(fine.check().is_empty());
    }
}
