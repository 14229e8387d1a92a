mod common;

use common::{sample, simulator, tap_script, waypoints};
use snapforge::demo::{trajectory_suite, DEMO_RESOLUTION};
use snapforge::distfield::geometry::from_barycentric;
use snapforge::forcemodel::equilibrium_depth;
use snapforge::simulator::{
    detect_events, signed_distance, touch_count, update_proxy, EventKind, Mode, SimState,
    Simulator, TrajectoryScript,
};
use snapforge::surfacegen::{bump, plane};
use snapforge::{ForceParams, Vec3, Zone};

fn plane_sim(params: ForceParams) -> Simulator {
    simulator(plane(0.1, 10), 64, params)
}

/// Hand released at t = 0 with the stylus resting on the plane.
fn released(duration: f64) -> TrajectoryScript {
    TrajectoryScript::new(vec![sample(0.0, None), sample(duration, None)])
}

#[test]
fn settles_at_equilibrium_depth() {
    let params = ForceParams::default();
    let sim = plane_sim(params.clone());
    let log = sim
        .run_trajectory_from(Mode::HapticSnap, &released(2.0), "eq", Vec3::zeros())
        .unwrap();
    let depth = -log.frames.last().unwrap().s.z;
    let expect = equilibrium_depth(&params);
    assert!((expect - 1.15295e-4).abs() < 1e-9);
    // Logged positions are quantized to 0.055 mm, so compare the unquantized state too.
    let mut st = sim.initial_state(Mode::HapticSnap, Vec3::zeros());
    for _ in 0..2000 {
        st = sim.step(&st, Mode::HapticSnap, None).unwrap();
    }
    let exact = -st.s.z;
    assert!(
        (exact - expect).abs() / expect < 0.05,
        "depth {exact} vs {expect}"
    );
    assert!((depth - expect).abs() <= 0.055e-3 / 2.0 + 1e-12 + 0.05 * expect);
    assert!(st.touching);
    assert_eq!(st.zone, Zone::Contact);
}

#[test]
fn stiffer_spring_halves_depth() {
    let run = |kappa: f64| {
        let sim = plane_sim(ForceParams {
            kappa,
            ..Default::default()
        });
        let mut st = sim.initial_state(Mode::HapticSnap, Vec3::zeros());
        for _ in 0..3000 {
            st = sim.step(&st, Mode::HapticSnap, None).unwrap();
        }
        -st.s.z
    };
    let ratio = run(500.0) / run(1000.0);
    assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
}

#[test]
fn haptic_mode_rests_on_surface() {
    let sim = plane_sim(ForceParams::default());
    let mut st = sim.initial_state(Mode::Haptic, Vec3::zeros());
    for _ in 0..500 {
        st = sim.step(&st, Mode::Haptic, None).unwrap();
    }
    assert_eq!(st.s, Vec3::zeros());
}

#[test]
fn straight_pass_visits_zones_in_order() {
    let params = ForceParams::default();
    let sim = plane_sim(params.clone());
    let script = waypoints(&[
        (0.0, Vec3::new(0.01, 0.0, 0.03)),
        (1.0, Vec3::new(0.01, 0.0, -0.004)),
    ]);
    let log = sim
        .run_trajectory(Mode::HapticSnap, &script, "pass")
        .unwrap();
    let mut order: Vec<Zone> = Vec::new();
    for f in &log.frames {
        if order.last() != Some(&f.zone) {
            order.push(f.zone);
        }
    }
    assert_eq!(
        order,
        vec![Zone::NoSnap, Zone::Snap, Zone::Buffer, Zone::Contact],
        "{order:?}"
    );
}

#[test]
fn snap_force_follows_field_direction() {
    let params = ForceParams::default();
    let sim = plane_sim(params.clone());
    let s = Vec3::new(0.013, -0.007, 0.5 * params.sigma);
    let st = sim.initial_state(Mode::HapticSnap, s);
    assert_eq!(st.zone, Zone::Snap);
    let dir = sim.field().sample_direction(&s).unwrap();
    let f = st.forces.f_snap;
    assert!((f.normalize() - dir).norm() < 1e-12);
    let r = sim.field().sample_distance(&s).unwrap();
    assert!((f.norm() - params.profile(r / params.sigma)).abs() < 1e-12);
    assert!(dir.z < -0.99);
}

#[test]
fn free_space_only_tracks_goal() {
    let sim = plane_sim(ForceParams::default());
    let s0 = Vec3::new(0.0, 0.0, 0.04);
    let st = sim.initial_state(Mode::Haptic, s0);
    assert_eq!(st.forces.total, Vec3::zeros());
    let goal = s0 + Vec3::new(0.001, 0.0, 0.0);
    let next = sim.step(&st, Mode::Haptic, Some(goal)).unwrap();
    let k = sim.config().hand_stiffness;
    let dt = sim.config().dt;
    let v = Vec3::new(0.001, 0.0, 0.0) * k * dt;
    assert_eq!(next.s_dot, v);
    assert_eq!(next.s, s0 + v * dt);
    assert_eq!(next.p, next.s);
}

fn suite() -> Vec<(&'static str, Simulator, Vec<TrajectoryScript>)> {
    trajectory_suite()
        .into_iter()
        .map(|(surface, scripts)| {
            let sim = simulator(surface.mesh, DEMO_RESOLUTION, surface.params);
            (
                surface.name,
                sim,
                scripts.into_iter().map(|(_, s)| s).collect(),
            )
        })
        .collect()
}

#[test]
fn proxy_never_penetrates() {
    for (name, sim, scripts) in suite() {
        let tol = sim.penetration_tolerance();
        for (k, script) in scripts.iter().enumerate() {
            for mode in [Mode::Haptic, Mode::HapticSnap] {
                let start = script.samples[0].goal.unwrap();
                let mut st = sim.initial_state(mode, start);
                let end = script.samples.last().unwrap().t;
                let steps = (end / sim.config().dt).round() as usize;
                let mut touched = false;
                for i in 1..=steps {
                    st = sim
                        .step(&st, mode, script.goal_at(i as f64 * sim.config().dt))
                        .unwrap();
                    let sd = signed_distance(sim.index(), &st.p);
                    assert!(
                        sd >= -tol,
                        "{name} script {k} {mode}: penetration {sd} at step {i}"
                    );
                    touched |= st.touching;
                }
                assert!(touched, "{name} script {k} {mode} never touched");
            }
        }
    }
}

#[test]
fn zone_tags_match_sampled_distance() {
    for (name, sim, scripts) in suite() {
        let sigma = sim.params().sigma;
        for script in &scripts {
            let mut st = sim.initial_state(Mode::HapticSnap, script.samples[0].goal.unwrap());
            let steps = (script.samples.last().unwrap().t / 1e-3).round() as usize;
            for i in 1..=steps {
                st = sim
                    .step(&st, Mode::HapticSnap, script.goal_at(i as f64 * 1e-3))
                    .unwrap();
                let r = sim.field().sample_distance(&st.p).unwrap_or(f64::INFINITY);
                assert_eq!(
                    st.zone != Zone::NoSnap,
                    r < sigma,
                    "{name} step {i}: r={r} zone={:?}",
                    st.zone
                );
            }
        }
    }
}

#[test]
fn zero_amplitude_reduces_to_haptic() {
    for (name, sim, scripts) in suite() {
        for off in [
            ForceParams {
                amplitude: 0.0,
                ..sim.params().clone()
            },
            ForceParams {
                force_scale: 0.0,
                ..sim.params().clone()
            },
        ] {
            let mut snap = sim.clone();
            snap.set_params(off.clone()).unwrap();
            let mut plain = sim.clone();
            plain.set_params(off).unwrap();
            for script in &scripts {
                let a = snap.run_trajectory(Mode::HapticSnap, script, "t").unwrap();
                let b = plain.run_trajectory(Mode::Haptic, script, "t").unwrap();
                assert_eq!(a.frames, b.frames, "{name}");
            }
        }
    }
}

#[test]
fn runs_are_bit_identical() {
    let (_, sim, scripts) = suite().swap_remove(1);
    let a = sim
        .run_trajectory(Mode::HapticSnap, &scripts[1], "curve")
        .unwrap();
    let b = sim
        .run_trajectory(Mode::HapticSnap, &scripts[1], "curve")
        .unwrap();
    let (mut ta, mut tb) = (Vec::new(), Vec::new());
    a.write_jsonl(&mut ta).unwrap();
    b.write_jsonl(&mut tb).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn timestamps_are_uniform() {
    let sim = plane_sim(ForceParams::default());
    let log = sim
        .run_trajectory(
            Mode::Haptic,
            &tap_script((0.0, 0.0), 0.02, -0.005, 1),
            "tap",
        )
        .unwrap();
    assert_eq!(log.frames.len(), 801);
    for (k, f) in log.frames.iter().enumerate() {
        assert!((f.t - k as f64 * 1e-3).abs() < 1e-12);
    }
}

#[test]
fn touch_events() {
    let sim = plane_sim(ForceParams::default());
    let hover = waypoints(&[
        (0.0, Vec3::new(0.0, 0.0, 0.03)),
        (0.5, Vec3::new(0.02, 0.0, 0.02)),
    ]);
    let log = sim
        .run_trajectory(Mode::HapticSnap, &hover, "hover")
        .unwrap();
    assert_eq!(touch_count(&detect_events(&log)), 0);

    for mode in [Mode::Haptic, Mode::HapticSnap] {
        let one = sim
            .run_trajectory(mode, &tap_script((0.0, 0.0), 0.02, -0.005, 1), "tap")
            .unwrap();
        let ev = detect_events(&one);
        assert_eq!(
            ev.iter()
                .filter(|e| e.kind == EventKind::TouchEnter)
                .count(),
            1,
            "{mode}"
        );
        assert_eq!(
            ev.iter().filter(|e| e.kind == EventKind::TouchExit).count(),
            1,
            "{mode}"
        );

        let three = sim
            .run_trajectory(mode, &tap_script((0.0, 0.0), 0.02, -0.005, 3), "tap")
            .unwrap();
        assert_eq!(touch_count(&detect_events(&three)), 3, "{mode}");
    }

    let pointer = sim
        .run_trajectory(
            Mode::NoHaptic,
            &tap_script((0.0, 0.0), 0.02, -0.005, 3),
            "tap",
        )
        .unwrap();
    assert_eq!(touch_count(&detect_events(&pointer)), 0);
}

#[test]
fn button_edges_become_events() {
    let sim = plane_sim(ForceParams::default());
    let mut script = waypoints(&[
        (0.0, Vec3::new(0.0, 0.0, 0.01)),
        (0.3, Vec3::new(0.01, 0.0, 0.01)),
    ]);
    for s in &mut script.samples {
        s.brush = (0.1..0.2).contains(&s.t);
        s.select = s.t >= 0.25;
    }
    let log = sim
        .run_trajectory(Mode::NoHaptic, &script, "marks")
        .unwrap();
    let kinds: Vec<EventKind> = detect_events(&log)
        .into_iter()
        .map(|e| e.kind)
        .filter(|k| !matches!(k, EventKind::SnapEnter | EventKind::SnapExit))
        .collect();
    assert_eq!(
        kinds,
        vec![
            EventKind::BrushStart,
            EventKind::BrushEnd,
            EventKind::Select
        ]
    );
}

#[test]
fn mechanical_energy_does_not_grow_with_fixed_goal() {
    let params = ForceParams {
        tau: 5.0,
        ..Default::default()
    };
    let sim = plane_sim(params.clone());
    let k_h = sim.config().hand_stiffness;
    for goal in [
        Vec3::new(0.0, 0.0, -0.004),
        Vec3::new(0.01, 0.0, 0.01),
        Vec3::new(-0.005, 0.003, -0.001),
    ] {
        let energy = |st: &SimState| {
            0.5 * st.s_dot.norm_squared()
                + 0.5 * k_h * (goal - st.s).norm_squared()
                + 0.5 * params.kappa * (st.s - st.p).norm_squared()
        };
        let mut st = sim.initial_state(Mode::Haptic, Vec3::new(0.0, 0.0, 0.02));
        let mut prev = energy(&st);
        for i in 0..3000 {
            st = sim.step(&st, Mode::Haptic, Some(goal)).unwrap();
            let e = energy(&st);
            assert!(
                e <= prev * (1.0 + 1e-9) + 1e-15,
                "goal {goal:?} step {i}: {e} > {prev}"
            );
            prev = e;
        }
    }
}

/// Closest point on a triangle by dense barycentric sampling with zoom-in
/// refinement; independent of the library's closed-form projection.
fn sampled_closest(a: &Vec3, b: &Vec3, c: &Vec3, q: &Vec3) -> (f64, Vec3) {
    let n = 24;
    let (mut cu, mut cv, mut half) = (1.0 / 3.0, 1.0 / 3.0, 0.7);
    let mut best = (f64::INFINITY, *a);
    for _ in 0..40 {
        let (mut bu, mut bv) = (cu, cv);
        for i in 0..=n {
            for j in 0..=n {
                let u = (cu - half + 2.0 * half * i as f64 / n as f64).clamp(0.0, 1.0);
                let v = (cv - half + 2.0 * half * j as f64 / n as f64).clamp(0.0, 1.0 - u);
                let p = from_barycentric(&[1.0 - u - v, u, v], a, b, c);
                let d = (p - q).norm();
                if d < best.0 {
                    best = (d, p);
                    (bu, bv) = (u, v);
                }
            }
        }
        (cu, cv) = (bu, bv);
        half *= 0.5;
    }
    best
}

#[test]
fn proxy_slides_to_constrained_minimizer_on_bump() {
    let mesh = bump(0.1, 22, 0.02, 0.015);
    assert!(mesh.triangles.len() >= 900 && mesh.triangles.len() <= 1100);
    let sim = simulator(mesh.clone(), 32, ForceParams::default());
    let tol = sim.contact_tolerance();
    let surface_z = |x: f64, y: f64| 0.02 * (-(x * x + y * y) / (2.0 * 0.015 * 0.015)).exp();
    let mut checked = 0;
    for k in 0..24 {
        let ang = k as f64 * 0.7;
        let rad = 0.004 + 0.0012 * k as f64;
        let (x, y) = (rad * ang.cos(), rad * ang.sin());
        let p_prev = sim
            .index()
            .nearest(&Vec3::new(x, y, surface_z(x, y) + 1e-3))
            .unwrap()
            .point;
        let dx = Vec3::new(0.002 * (ang + 1.0).cos(), 0.002 * (ang + 1.0).sin(), 0.0);
        let goal = p_prev + dx - Vec3::new(0.0, 0.0, 0.0015);
        let up = update_proxy(sim.index(), &p_prev, &goal, tol);
        assert!(up.constrained);
        let oracle = (0..mesh.triangles.len())
            .map(|t| {
                let [a, b, c] = mesh.corners(t);
                sampled_closest(&a, &b, &c, &goal)
            })
            .min_by(|l, r| l.0.total_cmp(&r.0))
            .unwrap();
        assert!(
            (up.p - oracle.1).norm() <= 2.0 * tol,
            "case {k}: {} vs {}",
            up.p,
            oracle.1
        );
        checked += 1;
    }
    assert_eq!(checked, 24);
}

#[test]
fn plane_projection_example() {
    let sim = plane_sim(ForceParams::default());
    let up = update_proxy(
        sim.index(),
        &Vec3::new(0.01, 0.02, 0.01),
        &Vec3::new(0.015, 0.018, -0.003),
        1e-7,
    );
    assert!((up.p - Vec3::new(0.015, 0.018, 0.0)).norm() < 1e-12);
    let far = Vec3::new(0.0, 0.0, 0.5);
    assert_eq!(
        update_proxy(sim.index(), &Vec3::new(0.0, 0.0, 0.3), &far, 1e-7).p,
        far
    );
}
