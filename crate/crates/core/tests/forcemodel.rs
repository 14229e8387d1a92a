use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use snapforge::forcemodel::{
    equilibrium_depth, f_decay, f_decay_argmax, f_mag, snap_force, snap_zone, spring_damper_force,
    ForceError,
};
use snapforge::{ForceParams, ProfileKind, Vec3, Zone};

#[test]
fn decay_profile_reference_values() {
    assert_abs_diff_eq!(f_decay(0.0, 3.0, 2.0), 0.0576474, epsilon = 1e-6);
    assert_abs_diff_eq!(f_decay(1.0, 3.0, 2.0), 0.4845517, epsilon = 1e-6);
    assert_abs_diff_eq!(f_decay_argmax(2.0), 0.615385, epsilon = 1e-6);
    assert_abs_diff_eq!(
        f_decay(f_decay_argmax(2.0), 3.0, 2.0),
        0.551819,
        epsilon = 1e-6
    );
}

#[test]
fn dense_scan_finds_the_same_peak() {
    let (mut best_x, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..=2_000_000 {
        let x = i as f64 * 1e-6;
        let v = f_decay(x, 3.0, 2.0);
        if v > best {
            (best_x, best) = (x, v);
        }
    }
    assert_abs_diff_eq!(best_x, f_decay_argmax(2.0), epsilon = 2e-6);
    assert_abs_diff_eq!(best, 3.0 / (2.0 * std::f64::consts::E), epsilon = 1e-9);
}

#[test]
fn control_profile_values() {
    assert_eq!(f_mag(0.0), 1.0);
    assert_eq!(f_mag(0.5), 0.25);
    assert_abs_diff_eq!(f_mag(1.0), 1.0 / 9.0, epsilon = 1e-12);
    assert!(f_decay(0.0, 3.0, 2.0) < f_decay(1.0, 3.0, 2.0));
    assert!(f_mag(0.0) > f_mag(1.0));
}

#[test]
fn spring_damper_examples() {
    let p = ForceParams {
        kappa: 500.0,
        tau: 0.0,
        ..ForceParams::default()
    };
    let f = spring_damper_force(
        &Vec3::new(0.0, -0.002, 0.0),
        &Vec3::zeros(),
        &Vec3::zeros(),
        &p,
    );
    assert_abs_diff_eq!(f, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    let p = ForceParams { tau: 0.3, ..p };
    assert_eq!(
        spring_damper_force(
            &Vec3::zeros(),
            &Vec3::zeros(),
            &Vec3::new(1.0, 0.0, 0.0),
            &p
        ),
        Vec3::new(-0.3, 0.0, 0.0)
    );
    assert_eq!(
        spring_damper_force(&Vec3::zeros(), &Vec3::zeros(), &Vec3::zeros(), &p),
        Vec3::zeros()
    );
}

#[test]
fn snap_force_branches() {
    let p = ForceParams::default();
    let down = Vec3::new(0.0, 0.0, -1.0);
    let up = Vec3::new(0.0, 0.0, 1.0);
    assert_eq!(
        snap_force(1.5 * p.sigma, None, None, &p).unwrap(),
        Vec3::zeros()
    );
    let f = snap_force(f_decay_argmax(2.0) * p.sigma, Some(down), Some(up), &p).unwrap();
    assert_abs_diff_eq!(f.norm(), 0.551819, epsilon = 1e-6);
    assert_abs_diff_eq!(f.normalize(), down, epsilon = 1e-15);
    let side = Vec3::new(1.0, 0.0, 0.0);
    let f = snap_force(0.5 * p.buffer_eps, Some(side), Some(up), &p).unwrap();
    assert_eq!(f.normalize(), -up);
    assert!(matches!(
        snap_force(0.5 * p.sigma, None, Some(up), &p),
        Err(ForceError::NoDirection)
    ));
    assert!(matches!(
        snap_force(0.5 * p.buffer_eps, Some(side), None, &p),
        Err(ForceError::NoDirection)
    ));
}

#[test]
fn step_at_the_snap_boundary_equals_profile_at_one() {
    let p = ForceParams::default();
    let dir = Vec3::new(0.0, 1.0, 0.0);
    let inside = snap_force(p.sigma * (1.0 - f64::EPSILON), Some(dir), Some(dir), &p).unwrap();
    let outside = snap_force(p.sigma, Some(dir), Some(dir), &p).unwrap();
    assert_eq!(outside, Vec3::zeros());
    assert_abs_diff_eq!(
        inside.norm(),
        p.force_scale * p.profile(1.0),
        epsilon = 1e-12
    );
    assert_eq!(snap_zone(p.sigma, &p), Zone::NoSnap);
    assert_eq!(snap_zone(p.buffer_eps, &p), Zone::Snap);
}

#[test]
fn equilibrium_depth_examples() {
    let p = ForceParams::default();
    assert_abs_diff_eq!(equilibrium_depth(&p), 1.15295e-4, epsilon = 1e-9);
    assert_eq!(
        equilibrium_depth(&ForceParams {
            force_scale: 0.0,
            ..p.clone()
        }),
        0.0
    );
    let stiff = ForceParams {
        kappa: 2.0 * p.kappa,
        ..p.clone()
    };
    assert_abs_diff_eq!(
        equilibrium_depth(&stiff),
        equilibrium_depth(&p) / 2.0,
        epsilon = 1e-18
    );
}

fn params() -> impl Strategy<Value = ForceParams> {
    (
        1.0f64..5.0,
        1.0f64..5.0,
        1e-3f64..1.0,
        0.01f64..0.99,
        0.0f64..5.0,
        prop::bool::ANY,
    )
        .prop_map(|(a, b, sigma, frac, scale, inv)| ForceParams {
            amplitude: a,
            decay: b,
            sigma,
            buffer_eps: frac * sigma,
            force_scale: scale,
            profile_kind: if inv {
                ProfileKind::InverseSquare
            } else {
                ProfileKind::Decay
            },
            ..ForceParams::default()
        })
}

fn unit() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("non-zero", |v| Vec3::from(*v).norm() > 1e-3)
        .prop_map(|v| Vec3::from(v).normalize())
}

proptest! {
    #[test]
    fn decay_is_positive_and_unimodal(a in 0.1f64..10.0, b in 0.5f64..10.0, x in 0.0f64..20.0, dx in 1e-6f64..1.0) {
        prop_assert!(f_decay(x, a, b) > 0.0);
        let peak = f_decay_argmax(b);
        let (y0, y1) = (f_decay(x, a, b), f_decay(x + dx, a, b));
        if x + dx <= peak {
            prop_assert!(y1 >= y0);
        } else if x >= peak {
            prop_assert!(y1 <= y0);
        }
    }

    #[test]
    fn control_profile_strictly_decreases(x in 0.0f64..100.0, dx in 1e-6f64..10.0) {
        prop_assert!(f_mag(x + dx) < f_mag(x));
    }

    #[test]
    fn zones_partition_distances(p in params(), r in 0.0f64..2.0) {
        let z = snap_zone(r, &p);
        let expected = if r >= p.sigma { Zone::NoSnap } else if r >= p.buffer_eps { Zone::Snap } else { Zone::Buffer };
        prop_assert_eq!(z, expected);
    }

    #[test]
    fn magnitude_ignores_the_branch(p in params(), t in 0.0f64..1.0, dir in unit(), n in unit()) {
        let r = t * p.sigma;
        let f = snap_force(r, Some(dir), Some(n), &p).unwrap();
        let want = p.force_scale * p.profile(r / p.sigma);
        prop_assert!((f.norm() - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn spring_force_is_exact(s in prop::array::uniform3(-1.0f64..1.0), q in prop::array::uniform3(-1.0f64..1.0), v in prop::array::uniform3(-1.0f64..1.0)) {
        let p = ForceParams::default();
        let (s, q, v) = (Vec3::from(s), Vec3::from(q), Vec3::from(v));
        prop_assert_eq!(spring_damper_force(&s, &q, &v, &p), -(s - q) * p.kappa - v * p.tau);
    }
}
