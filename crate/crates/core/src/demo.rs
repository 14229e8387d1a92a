//! Bundled demo surfaces and the scripted trajectory suite.
//!
//! Four small surfaces in device coordinates (metres), each with three hand
//! scripts: repeated taps, a pressed slide across the top, and a fast plunge
//! that is then held. Force parameters scale with each surface's size.

use crate::forcemodel::ForceParams;
use crate::simulator::{ScriptSample, TrajectoryScript};
use crate::surfacegen::{bump, hemisphere, icosphere, plane, TriMesh};
use crate::Vec3;

/// Field resolution used for the demo surfaces.
pub const DEMO_RESOLUTION: usize = 48;

#[derive(Clone, Debug)]
pub struct DemoSurface {
    pub name: &'static str,
    pub mesh: TriMesh,
    pub params: ForceParams,
    /// Height of the highest point above `z = 0`.
    pub top: f64,
}

pub fn demo_surfaces() -> Vec<DemoSurface> {
    let surfaces = [
        ("plane", plane(0.1, 10), 0.0),
        ("bump", bump(0.1, 22, 0.02, 0.015), 0.02),
        ("sphere", icosphere(0.04, 3), 0.04),
        ("hemisphere", hemisphere(0.04, 12, 24), 0.04),
    ];
    surfaces
        .into_iter()
        .map(|(name, mesh, top)| {
            let diag = mesh.aabb_diagonal();
            let params = ForceParams {
                sigma: 0.1 * diag,
                buffer_eps: 0.01 * diag,
                ..ForceParams::default()
            };
            DemoSurface {
                name,
                mesh,
                params,
                top,
            }
        })
        .collect()
}

/// Piecewise-linear script through `(t, goal)` waypoints, sampled at 100 Hz.
pub fn waypoints(points: &[(f64, Vec3)]) -> TrajectoryScript {
    let sample = |t, g| ScriptSample {
        t,
        goal: Some(g),
        select: false,
        brush: false,
        erase: false,
    };
    let mut samples = Vec::new();
    for w in points.windows(2) {
        let ((t0, a), (t1, b)) = (w[0], w[1]);
        let n = ((t1 - t0) * 100.0).round().max(1.0) as usize;
        for k in 0..n {
            let f = k as f64 / n as f64;
            samples.push(sample(t0 + (t1 - t0) * f, a + (b - a) * f));
        }
    }
    if let Some(&(t, g)) = points.last() {
        samples.push(sample(t, g));
    }
    TrajectoryScript {
        sample_rate: Some(100.0),
        samples,
    }
}

/// `taps` descents from `above` to `below` and back at fixed `x, y`, 0.8 s each.
pub fn tap_script(xy: (f64, f64), above: f64, below: f64, taps: usize) -> TrajectoryScript {
    let at = |z| Vec3::new(xy.0, xy.1, z);
    let mut pts = vec![(0.0, at(above))];
    let mut t = 0.0;
    for _ in 0..taps {
        pts.push((t + 0.2, at(below)));
        pts.push((t + 0.4, at(below)));
        pts.push((t + 0.6, at(above)));
        pts.push((t + 0.8, at(above)));
        t += 0.8;
    }
    waypoints(&pts)
}

/// The three suite scripts for a surface whose highest point is `top`.
pub fn suite_scripts(top: f64) -> Vec<(&'static str, TrajectoryScript)> {
    vec![
        (
            "taps",
            tap_script((0.004, -0.003), top + 0.02, top - 0.006, 2),
        ),
        (
            "slide",
            waypoints(&[
                (0.0, Vec3::new(-0.03, 0.002, top + 0.01)),
                (0.3, Vec3::new(-0.02, 0.002, top - 0.01)),
                (1.3, Vec3::new(0.02, 0.004, top - 0.01)),
                (1.6, Vec3::new(0.03, 0.004, top + 0.02)),
            ]),
        ),
        (
            "plunge",
            waypoints(&[
                (0.0, Vec3::new(0.0, 0.0, top + 0.03)),
                (0.05, Vec3::new(0.001, 0.0, top - 0.02)),
                (0.5, Vec3::new(0.001, 0.0, top - 0.02)),
            ]),
        ),
    ]
}

/// Every demo surface paired with its scripts.
pub fn trajectory_suite() -> Vec<(DemoSurface, Vec<(&'static str, TrajectoryScript)>)> {
    demo_surfaces()
        .into_iter()
        .map(|s| {
            let scripts = suite_scripts(s.top);
            (s, scripts)
        })
        .collect()
}
