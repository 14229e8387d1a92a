use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use crate::Vec3;

use super::mesh::TriMesh;
use super::SurfaceError;

/// A mesh read from disk plus anything suspicious found while loading.
#[derive(Clone, Debug)]
pub struct LoadedMesh {
    pub mesh: TriMesh,
    pub warnings: Vec<String>,
}

fn options() -> tobj::LoadOptions {
    tobj::LoadOptions {
        single_index: true,
        triangulate: true,
        ignore_points: true,
        ignore_lines: true,
    }
}

/// Reads a Wavefront OBJ file. Missing normals are recomputed with Newell's
/// method and missing UVs come from a planar projection.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<LoadedMesh, SurfaceError> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_obj(&mut std::io::BufReader::new(file))
}

pub fn parse_obj(reader: &mut impl BufRead) -> Result<LoadedMesh, SurfaceError> {
    let (models, _) = tobj::load_obj_buf(reader, &options(), |_| Ok(Default::default()))
        .map_err(|e| SurfaceError::MalformedMesh(e.to_string()))?;

    let mut mesh = TriMesh::default();
    let mut have_normals = true;
    let mut have_uvs = true;
    // Vertices come back in order of first use by a face, one per distinct
    // position/uv/normal combination.
    for model in &models {
        let m = &model.mesh;
        let base = mesh.vertices.len();
        let count = m.positions.len() / 3;
        for p in m.positions.chunks_exact(3) {
            mesh.vertices.push(Vec3::new(p[0], p[1], p[2]));
        }
        if m.normals.len() == 3 * count {
            mesh.normals.extend(
                m.normals
                    .chunks_exact(3)
                    .map(|n| Vec3::new(n[0], n[1], n[2])),
            );
        } else {
            have_normals = false;
        }
        if m.texcoords.len() == 2 * count {
            mesh.uvs
                .extend(m.texcoords.chunks_exact(2).map(|t| [t[0], t[1]]));
        } else {
            have_uvs = false;
        }
        for tri in m.indices.chunks_exact(3) {
            mesh.triangles.push([
                base + tri[0] as usize,
                base + tri[1] as usize,
                base + tri[2] as usize,
            ]);
        }
    }
    if mesh.triangles.is_empty() {
        return Err(SurfaceError::MalformedMesh("no faces".into()));
    }
    if let Some(bad) = mesh
        .triangles
        .iter()
        .flatten()
        .find(|&&i| i >= mesh.vertices.len())
    {
        return Err(SurfaceError::MalformedMesh(format!(
            "vertex index {bad} out of range"
        )));
    }

    let mut warnings = Vec::new();
    let diag = mesh.aabb_diagonal();
    let before = mesh.triangles.len();
    let min_area = 1e-14 * diag * diag;
    let keep: Vec<bool> = (0..before)
        .map(|t| mesh.triangle_area(t) > min_area)
        .collect();
    let mut k = keep.iter();
    mesh.triangles.retain(|_| *k.next().unwrap());
    if mesh.triangles.len() != before {
        warnings.push(format!(
            "dropped {} degenerate triangles",
            before - mesh.triangles.len()
        ));
    }
    if mesh.triangles.is_empty() {
        return Err(SurfaceError::MalformedMesh(
            "all faces are degenerate".into(),
        ));
    }
    let nm = mesh.non_manifold_edges();
    if !nm.is_empty() {
        warnings.push(format!(
            "{} non-manifold edges (shared by more than two faces)",
            nm.len()
        ));
    }

    let normals_ok = have_normals
        && mesh
            .normals
            .iter()
            .all(|n| n.norm() > 0.0 && n.iter().all(|c| c.is_finite()));
    if normals_ok {
        for n in &mut mesh.normals {
            n.normalize_mut();
        }
    } else {
        mesh.recompute_normals();
    }
    let uvs_ok = have_uvs && mesh.uvs.iter().flatten().all(|c| (0.0..=1.0).contains(c));
    if !uvs_ok {
        if have_uvs {
            warnings.push("UVs outside [0,1] replaced by planar projection".into());
        }
        mesh.planar_uvs();
    }
    Ok(LoadedMesh { mesh, warnings })
}

/// Serialises a mesh as ASCII OBJ with positions, UVs and normals.
pub fn write_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for uv in &mesh.uvs {
        let _ = writeln!(out, "vt {} {}", uv[0], uv[1]);
    }
    for n in &mesh.normals {
        let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
    }
    let has_uv = mesh.uvs.len() == mesh.vertices.len();
    let has_n = mesh.normals.len() == mesh.vertices.len();
    for t in &mesh.triangles {
        out.push('f');
        for &i in t {
            let i = i + 1;
            match (has_uv, has_n) {
                (true, true) => write!(out, " {i}/{i}/{i}"),
                (true, false) => write!(out, " {i}/{i}"),
                (false, true) => write!(out, " {i}//{i}"),
                (false, false) => write!(out, " {i}"),
            }
            .unwrap();
        }
        out.push('\n');
    }
    out
}
