//! Hardware-free simulation and evaluation toolkit for snap-to-surface
//! haptic interaction.
//!
//! The crate is organised along the data flow of a trial:
//!
//! * [`surfacegen`] builds height fields, scalar textures and triangle meshes.
//! * [`distfield`] voxelizes the unsigned distance to a mesh and answers
//!   distance, direction and nearest-point queries.
//! * [`forcemodel`] holds the spring-damper coupling and the snap-force
//!   profiles.
//! * [`simulator`] runs the fixed-rate stylus/proxy loop over scripted
//!   trajectories and produces trial logs.
//! * [`brushing`] turns logs into brushed textures and builds band textures.
//! * [`metrics`] scores brushed curves (EDT, deviation, irregularity) and
//!   localization answers.
//! * [`analysis`] computes bootstrap confidence intervals over trial records.
//! * [`demo`] bundles small surfaces and scripted hand trajectories.
//!
//! World units are meters, forces are newtons and time is seconds. Surfaces
//! use `+z` as the elevation axis.

pub mod analysis;
pub mod brushing;
pub mod demo;
pub mod distfield;
pub mod forcemodel;
pub mod metrics;
pub mod pgm;
pub mod simulator;
pub mod surfacegen;

/// 3D vector used for positions, velocities, normals and forces.
pub type Vec3 = nalgebra::Vector3<f64>;

pub use distfield::{DistanceField, SurfaceHit};
pub use forcemodel::{ForceParams, ForceSample, ProfileKind, Zone};
pub use simulator::{Mode, SimState, TrajectoryScript, TrialLog};
pub use surfacegen::{HeightField, HeightFieldSpec, ScalarTexture, TriMesh};

// The guide's code listings are compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/surfaces.md")]
    struct Surfaces;
    #[doc = include_str!("../../../book/src/distance-fields.md")]
    struct DistanceFields;
    #[doc = include_str!("../../../book/src/forces.md")]
    struct Forces;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/brushing.md")]
    struct Brushing;
    #[doc = include_str!("../../../book/src/metrics.md")]
    struct Metrics;
    #[doc = include_str!("../../../book/src/statistics.md")]
    struct Statistics;
}
