#![allow(dead_code)]

pub mod oracles;

use std::sync::Arc;

use snapforge::distfield::{build_distance_field, SurfaceIndex};
use snapforge::simulator::{ScriptSample, SimConfig, Simulator};
use snapforge::surfacegen::TriMesh;
use snapforge::{ForceParams, Vec3};

pub fn simulator(mesh: TriMesh, resolution: usize, params: ForceParams) -> Simulator {
    let index = SurfaceIndex::new(mesh);
    let df = build_distance_field(&index, resolution).unwrap();
    Simulator::new(index, Arc::new(df), params, SimConfig::default()).unwrap()
}

pub fn sample(t: f64, goal: Option<Vec3>) -> ScriptSample {
    ScriptSample {
        t,
        goal,
        select: false,
        brush: false,
        erase: false,
    }
}

#[allow(unused_imports)]
pub use snapforge::demo::{tap_script, waypoints};
