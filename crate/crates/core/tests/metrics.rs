mod common;

use common::oracles::{brute_edt, brute_irregularity, brute_rmse, random_mask, rng};
use proptest::prelude::*;
use snapforge::brushing::{make_band_texture, BandSpec, Mask};
use snapforge::metrics::{
    curve_deviation, curve_irregularity, depression_value, edt, filter_5pct, localization_error,
    protrusion_scale, protrusion_value, MetricsError, TexelSet,
};
use snapforge::surfacegen::{hemisphere, plane, ValueScale};
use snapforge::Vec3;

fn row_mask(w: usize, h: usize, rows: &[usize]) -> Mask {
    let mut m = Mask::new(w, h);
    for &j in rows {
        for i in 0..w {
            m.set(i, j, true);
        }
    }
    m
}

fn full_band(w: usize, h: usize, rows: std::ops::Range<usize>) -> TexelSet {
    TexelSet::from_mask(&row_mask(w, h, &rows.collect::<Vec<_>>()))
}

#[test]
fn edt_matches_brute_force_on_random_masks() {
    let mut r = rng(101);
    for density in [0.002, 0.02, 0.2, 0.7] {
        for _ in 0..10 {
            let m = random_mask(&mut r, 32, 32, density);
            let got = edt(&m).unwrap();
            for (a, b) in got.values.iter().zip(brute_edt(&m)) {
                assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn edt_on_non_square_images() {
    let mut r = rng(7);
    for (w, h) in [(1, 17), (23, 1), (64, 9), (5, 64)] {
        let m = random_mask(&mut r, w, h, 0.05);
        assert_eq!(edt(&m).unwrap().values, brute_edt(&m));
    }
}

#[test]
fn edt_rejects_empty_mask() {
    assert_eq!(
        edt(&Mask::new(4, 4)).unwrap_err(),
        MetricsError::EmptyForeground
    );
}

#[test]
fn deviation_and_irregularity_match_resummation() {
    let mut r = rng(202);
    for _ in 0..20 {
        let a = random_mask(&mut r, 32, 32, 0.03);
        let b = random_mask(&mut r, 32, 32, 0.03);
        let band_mask = random_mask(&mut r, 32, 32, 0.4);
        let band = TexelSet::from_mask(&band_mask);
        let (da, db) = (edt(&a).unwrap(), edt(&b).unwrap());
        let rmse = curve_deviation(&da, &db, &band).unwrap();
        assert!((rmse - brute_rmse(&brute_edt(&a), &brute_edt(&b), &band_mask)).abs() <= 1e-12);
        let irr = curve_irregularity(&db, &band).unwrap();
        assert!((irr - brute_irregularity(&brute_edt(&b), &band_mask)).abs() <= 1e-12);
    }
}

#[test]
fn identical_curves_and_constant_field_are_exactly_zero() {
    let medial = row_mask(32, 32, &[16]);
    let d = edt(&medial).unwrap();
    let band = full_band(32, 32, 12..21);
    assert_eq!(curve_deviation(&d, &d, &band).unwrap(), 0.0);
    let flat = snapforge::metrics::DistanceImage {
        width: 32,
        height: 32,
        values: vec![2.5; 1024],
    };
    assert_eq!(curve_irregularity(&flat, &band).unwrap(), 0.0);
}

#[test]
fn larger_offset_gives_larger_deviation() {
    let band = full_band(32, 32, 11..22);
    let d_ref = edt(&row_mask(32, 32, &[16])).unwrap();
    let rmse = |k: usize| {
        curve_deviation(&d_ref, &edt(&row_mask(32, 32, &[16 + k])).unwrap(), &band).unwrap()
    };
    let (r1, r3) = (rmse(1), rmse(3));
    assert!(r1 > 0.0 && r1 < r3, "offset 1: {r1}, offset 3: {r3}");
    // Independent check of the offset-1 value.
    let want = brute_rmse(
        &brute_edt(&row_mask(32, 32, &[16])),
        &brute_edt(&row_mask(32, 32, &[17])),
        &row_mask(32, 32, &(11..22).collect::<Vec<_>>()),
    );
    assert!((r1 - want).abs() <= 1e-12);
}

#[test]
fn mirrored_offset_leaves_deviation_unchanged() {
    let band = full_band(33, 33, 11..22);
    let d_ref = edt(&row_mask(33, 33, &[16])).unwrap();
    for k in 1..5 {
        let up =
            curve_deviation(&d_ref, &edt(&row_mask(33, 33, &[16 + k])).unwrap(), &band).unwrap();
        let down =
            curve_deviation(&d_ref, &edt(&row_mask(33, 33, &[16 - k])).unwrap(), &band).unwrap();
        assert_eq!(up, down);
    }
}

#[test]
fn jitter_raises_irregularity() {
    let spec = BandSpec {
        polyline: vec![[0.05, 0.5], [0.95, 0.5]],
        half_width: 6.0,
        width: 64,
        height: 64,
    };
    let (band_mask, medial) = make_band_texture(&spec).unwrap();
    let band = TexelSet::from_mask(&band_mask);
    let mut jittered = Mask::new(64, 64);
    for (i, j) in medial.tagged() {
        let jj = if i % 2 == 0 { j + 1 } else { j - 1 };
        jittered.set(i, jj, true);
    }
    let smooth = curve_irregularity(&edt(&medial).unwrap(), &band).unwrap();
    let rough = curve_irregularity(&edt(&jittered).unwrap(), &band).unwrap();
    assert!(smooth < rough, "smooth {smooth} vs jittered {rough}");
}

#[test]
fn dimension_mismatch_and_small_band() {
    let d = edt(&row_mask(8, 8, &[3])).unwrap();
    let other = edt(&row_mask(8, 9, &[3])).unwrap();
    let band = full_band(8, 8, 2..5);
    assert!(matches!(
        curve_deviation(&d, &other, &band),
        Err(MetricsError::DimensionMismatch(..))
    ));
    let mut one = Mask::new(8, 8);
    one.set(1, 1, true);
    assert_eq!(
        curve_irregularity(&d, &TexelSet::from_mask(&one)).unwrap_err(),
        MetricsError::BandTooSmall(1, 2)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn out_of_band_texels_never_matter(seed in any::<u64>(), bump in 0.1f64..50.0) {
        let mut r = rng(seed);
        let a = random_mask(&mut r, 24, 24, 0.05);
        let b = random_mask(&mut r, 24, 24, 0.05);
        let band_mask = random_mask(&mut r, 24, 24, 0.5);
        let band = TexelSet::from_mask(&band_mask);
        let (da, db) = (edt(&a).unwrap(), edt(&b).unwrap());
        let (mut pa, mut pb) = (da.clone(), db.clone());
        for (k, inside) in band_mask.tags.iter().enumerate() {
            if !inside {
                pa.values[k] += bump;
                pb.values[k] *= 1.0 + bump;
            }
        }
        prop_assert_eq!(curve_deviation(&da, &db, &band).unwrap(), curve_deviation(&pa, &pb, &band).unwrap());
        if band.len() >= 2 {
            prop_assert_eq!(curve_irregularity(&db, &band).unwrap(), curve_irregularity(&pb, &band).unwrap());
        }
    }

    #[test]
    fn edt_is_zero_exactly_on_foreground(seed in any::<u64>()) {
        let m = random_mask(&mut rng(seed), 16, 16, 0.1);
        let d = edt(&m).unwrap();
        for (k, &on) in m.tags.iter().enumerate() {
            prop_assert!(d.values[k] >= 0.0);
            prop_assert_eq!(d.values[k] == 0.0, on);
        }
    }
}

#[test]
fn localization_error_and_filter() {
    assert_eq!(localization_error(7.0, 7.0).unwrap(), 0.0);
    assert!((localization_error(102.0, 100.0).unwrap() - 0.02).abs() < 1e-15);
    assert!((localization_error(-98.0, -100.0).unwrap() - 0.02).abs() < 1e-15);
    assert_eq!(
        localization_error(1.0, 0.0).unwrap_err(),
        MetricsError::ZeroTruth
    );
    assert_eq!(
        filter_5pct(&[0.0, 0.049, 0.05, 0.06, 0.2]),
        vec![0.0, 0.049, 0.05]
    );
}

#[test]
fn protrusion_and_depression_values() {
    let hemi = hemisphere(0.04, 12, 24);
    let scale = protrusion_scale(&hemi, [0.0, 1000.0]);
    let (lo, _) = hemi.aabb();
    let lowest = hemi.vertices.iter().copied().find(|v| v.z == lo.z).unwrap();
    assert_eq!(protrusion_value(&hemi, &lowest, &scale), 0.0);
    let top = Vec3::new(0.0, 0.0, 0.04);
    assert!((protrusion_value(&hemi, &top, &scale) - 1000.0).abs() < 1e-9);

    let flat = plane(0.1, 5);
    let s = protrusion_scale(&flat, [0.0, 1000.0]);
    let values: Vec<f64> = flat
        .vertices
        .iter()
        .map(|v| protrusion_value(&flat, v, &s))
        .collect();
    assert!(values.iter().all(|&v| v == values[0]));

    let dscale = ValueScale {
        source: [0.0, 0.05],
        display: [0.0, 1000.0],
    };
    for v in &hemi.vertices {
        let got = depression_value(&Vec3::zeros(), v, &dscale);
        assert!((got - dscale.apply(0.04)).abs() < 1e-9, "{got}");
    }
}
