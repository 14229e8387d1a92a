//! Procedural surfaces, scalar textures and triangle meshes.
//!
//! Height fields are blended from weighted noise, Gaussian and sinusoid
//! layers, upsampled bilinearly and triangulated on a regular grid. External
//! meshes are read from Wavefront OBJ. Every mesh leaving this module carries
//! unit vertex normals (Newell's method) and UVs in `[0,1]²`.

mod heightfield;
mod mesh;
mod obj;
mod perlin;
mod primitives;
mod texture;

pub use heightfield::{gen_heightfield, HeightField, HeightFieldSpec, Layer, LayerKind};
pub use mesh::{heightfield_to_mesh, newell_normal, subdivide_midpoint, MeshIssue, TriMesh};
pub use obj::{load_mesh, parse_obj, write_obj, LoadedMesh};
pub use perlin::Perlin;
pub use primitives::{bump, hemisphere, icosphere, plane};
pub use texture::{
    gen_scalar_texture, GaussianComponent, GaussianMixtureSpec, ScalarTexture, ValueScale,
    CONTOUR_BANDS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("unknown layer kind `{0}`")]
    UnknownLayerKind(String),
    #[error("non-finite parameter `{name}` in layer {layer}")]
    NonFiniteParameter { layer: usize, name: &'static str },
    #[error("invalid height field spec: {0}")]
    InvalidSpec(String),
    #[error("height field is empty or smaller than 2x2")]
    EmptyHeightField,
    #[error("upsample factor must be at least 1")]
    BadUpsampleFactor,
    #[error("malformed mesh: {0}")]
    MalformedMesh(String),
    #[error("degenerate covariance in mixture component {0}")]
    DegenerateCovariance(usize),
    #[error("gaussian mixture needs at least one component")]
    EmptyMixture,
    #[error("invalid texture dimensions {0}x{1}")]
    BadDimensions(usize, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
