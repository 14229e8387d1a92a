//! Reference surfaces used by the demo assets and the test suites.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use crate::Vec3;

use super::heightfield::HeightField;
use super::mesh::{heightfield_to_mesh, TriMesh};

/// Subdivided icosahedron projected onto a sphere: `20·4^subdivisions` faces,
/// outward winding, radial normals, spherical UVs.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let uvs = verts
        .iter()
        .map(|n| {
            [
                (n.y.atan2(n.x) / TAU + 0.5).clamp(0.0, 1.0),
                (n.z.clamp(-1.0, 1.0).acos() / PI).clamp(0.0, 1.0),
            ]
        })
        .collect();
    TriMesh {
        vertices: verts.iter().map(|n| n * radius).collect(),
        triangles: faces,
        normals: verts,
        uvs,
    }
}

/// Flat square grid of side `size` centred on the origin in the `z = 0` plane.
pub fn plane(size: f64, cells: usize) -> TriMesh {
    let n = cells.max(1) + 1;
    let hf = HeightField::flat(n, n, size / (n - 1) as f64, 0.0);
    let mut mesh = heightfield_to_mesh(&hf, 1).expect("valid grid");
    for v in &mut mesh.vertices {
        v.x -= size / 2.0;
        v.y -= size / 2.0;
    }
    mesh
}

/// Square grid with a Gaussian bump of the given height and width (std-dev)
/// at the origin.
pub fn bump(size: f64, cells: usize, height: f64, width: f64) -> TriMesh {
    let n = cells.max(1) + 1;
    let step = size / (n - 1) as f64;
    let mut e = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = i as f64 * step - size / 2.0;
            let y = j as f64 * step - size / 2.0;
            e.push(height * (-(x * x + y * y) / (2.0 * width * width)).exp());
        }
    }
    let hf = HeightField::new(n, n, step, e).expect("finite grid");
    let mut mesh = heightfield_to_mesh(&hf, 1).expect("valid grid");
    for v in &mut mesh.vertices {
        v.x -= size / 2.0;
        v.y -= size / 2.0;
    }
    mesh
}

/// Open upper hemisphere of the given radius centred on the origin, seen from
/// outside. `rings` latitude bands, `segments` longitude slices.
pub fn hemisphere(radius: f64, rings: usize, segments: usize) -> TriMesh {
    let rings = rings.max(1);
    let segments = segments.max(3);
    let mut vertices = vec![Vec3::new(0.0, 0.0, radius)];
    for r in 1..=rings {
        let theta = (r as f64 / rings as f64) * PI / 2.0;
        for s in 0..segments {
            let az = s as f64 / segments as f64 * TAU;
            vertices.push(
                Vec3::new(theta.sin() * az.cos(), theta.sin() * az.sin(), theta.cos()) * radius,
            );
        }
    }
    let ring = |r: usize, s: usize| 1 + (r - 1) * segments + s % segments;
    let mut triangles = Vec::new();
    for s in 0..segments {
        triangles.push([0, ring(1, s), ring(1, s + 1)]);
    }
    for r in 1..rings {
        for s in 0..segments {
            let (a, b) = (ring(r, s), ring(r, s + 1));
            let (c, d) = (ring(r + 1, s), ring(r + 1, s + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    let normals = vertices.iter().map(|v| v.normalize()).collect();
    let uvs = vertices
        .iter()
        .map(|v| {
            [
                (v.x / radius * 0.5 + 0.5).clamp(0.0, 1.0),
                (v.y / radius * 0.5 + 0.5).clamp(0.0, 1.0),
            ]
        })
        .collect();
    TriMesh {
        vertices,
        triangles,
        normals,
        uvs,
    }
}
