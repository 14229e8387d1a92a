//! Surfaces a session can be opened on. Loaded once, shared read-only.

use std::collections::BTreeMap;
use std::sync::Arc;

use snapforge::distfield::{build_distance_field, DistanceField, SurfaceIndex};
use snapforge::surfacegen::{bump, plane, TriMesh};
use snapforge::ForceParams;

use crate::api::{Ranges, SurfaceSummary};

#[derive(Debug)]
pub struct Surface {
    pub name: String,
    pub index: SurfaceIndex,
    pub field: Arc<DistanceField>,
    pub default_params: ForceParams,
}

impl Surface {
    pub fn new(name: &str, index: SurfaceIndex, field: DistanceField) -> Self {
        let default_params = ForceParams::fitted(index.mesh().aabb_diagonal(), field.spacing);
        Self {
            name: name.into(),
            index,
            field: Arc::new(field),
            default_params,
        }
    }

    /// Builds the distance field at `resolution`.
    pub fn build(name: &str, mesh: TriMesh, resolution: usize) -> Result<Self, String> {
        let index = SurfaceIndex::new(mesh);
        let field = build_distance_field(&index, resolution).map_err(|e| format!("{name}: {e}"))?;
        Ok(Self::new(name, index, field))
    }

    pub fn bounds(&self) -> [[f64; 3]; 2] {
        let (lo, hi) = self.index.mesh().aabb();
        [[lo.x, lo.y, lo.z], [hi.x, hi.y, hi.z]]
    }

    pub fn ranges(&self) -> Ranges {
        Ranges::for_surface(self.index.mesh().aabb_diagonal())
    }

    pub fn summary(&self) -> SurfaceSummary {
        SurfaceSummary {
            name: self.name.clone(),
            triangles: self.index.mesh().triangles.len(),
            bounds: self.bounds(),
            default_params: self.default_params.clone(),
        }
    }
}

/// Named surfaces; the first inserted is the default.
#[derive(Debug, Default)]
pub struct Catalog {
    surfaces: BTreeMap<String, Arc<Surface>>,
    default: Option<String>,
}

impl Catalog {
    /// A 10 cm flat plate and a 10 cm plate with a 1.5 cm Gaussian bump.
    pub fn builtin(resolution: usize) -> Result<Self, String> {
        let mut c = Self::default();
        c.insert(Surface::build("plane", plane(0.1, 20), resolution)?);
        c.insert(Surface::build("bump", bump(0.1, 40, 0.015, 0.015), resolution)?);
        Ok(c)
    }

    pub fn insert(&mut self, surface: Surface) {
        self.default.get_or_insert_with(|| surface.name.clone());
        self.surfaces.insert(surface.name.clone(), Arc::new(surface));
    }

    pub fn get(&self, name: Option<&str>) -> Option<Arc<Surface>> {
        let name = name.or(self.default.as_deref())?;
        self.surfaces.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.surfaces.keys().map(String::as_str)
    }

    pub fn summaries(&self) -> Vec<SurfaceSummary> {
        self.surfaces.values().map(|s| s.summary()).collect()
    }
}
