//! Slow, direct reference implementations used as test oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snapforge::brushing::Mask;

/// All-pairs minimum distance to a foreground texel.
pub fn brute_edt(m: &Mask) -> Vec<f64> {
    let fg: Vec<(usize, usize)> = m.tagged().collect();
    let mut out = Vec::with_capacity(m.width * m.height);
    for j in 0..m.height {
        for i in 0..m.width {
            let best = fg
                .iter()
                .map(|&(a, b)| {
                    let (dx, dy) = (a as f64 - i as f64, b as f64 - j as f64);
                    dx * dx + dy * dy
                })
                .fold(f64::INFINITY, f64::min);
            out.push(best.sqrt());
        }
    }
    out
}

/// Row-major scan of a grid, collecting values at `band` texels.
fn band_values(w: usize, band: &Mask, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut v = Vec::new();
    for idx in 0..band.tags.len() {
        if band.tags[idx] {
            v.push(f(idx % w, idx / w));
        }
    }
    v
}

pub fn brute_rmse(d_ref: &[f64], d_brush: &[f64], band: &Mask) -> f64 {
    let w = band.width;
    let sq = band_values(w, band, |i, j| {
        (d_ref[j * w + i] - d_brush[j * w + i]).powi(2)
    });
    (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
}

/// Population SD of the 5-point Laplacian over the band, with out-of-band
/// neighbours replaced by the centre value.
pub fn brute_irregularity(d: &[f64], band: &Mask) -> f64 {
    let (w, h) = (band.width, band.height);
    let lap = band_values(w, band, |i, j| {
        let c = d[j * w + i];
        let mut s = -4.0 * c;
        for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (x, y) = (i as i64 + di, j as i64 + dj);
            let inside = x >= 0
                && y >= 0
                && (x as usize) < w
                && (y as usize) < h
                && band.get(x as usize, y as usize);
            s += if inside {
                d[y as usize * w + x as usize]
            } else {
                c
            };
        }
        s
    });
    let n = lap.len() as f64;
    let m = lap.iter().sum::<f64>() / n;
    (lap.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt()
}

/// Mask with roughly `density` of texels set, never empty.
pub fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> Mask {
    let mut m = Mask::new(w, h);
    for t in &mut m.tags {
        *t = rng.random_bool(density);
    }
    if m.is_empty() {
        let (i, j) = (rng.random_range(0..w), rng.random_range(0..h));
        m.set(i, j, true);
    }
    m
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Percentile bootstrap written independently of the library: plain loops,
/// the same per-resample generator, hand-written type 7 quantiles.
pub fn reference_bootstrap(a: &[f64], b: &[f64], n: usize, level: f64, seed: u64) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut diffs = Vec::with_capacity(n);
    for k in 0..n {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(k as u64);
        let mut sa = 0.0;
        for _ in 0..a.len() {
            sa += a[r.random_range(0..a.len())];
        }
        let mut sb = 0.0;
        for _ in 0..b.len() {
            sb += b[r.random_range(0..b.len())];
        }
        diffs.push(sa / a.len() as f64 - sb / b.len() as f64);
    }
    diffs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let q = |p: f64| {
        let h = (n - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        diffs[lo] * (1.0 - (h - lo as f64)) + diffs[hi] * (h - lo as f64)
    };
    let alpha = 1.0 - level;
    (q(alpha / 2.0), q(1.0 - alpha / 2.0))
}

use snapforge::surfacegen::TriMesh;
use snapforge::Vec3;

fn segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

/// Distance from `p` to a triangle: the plane foot when it falls inside,
/// otherwise the closest edge.
pub fn triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let n = (b - a).cross(&(c - a));
    let n2 = n.norm_squared();
    let foot = p - n * ((p - a).dot(&n) / n2);
    let inside = [(a, b), (b, c), (c, a)]
        .iter()
        .all(|(u, v)| (*v - *u).cross(&(foot - *u)).dot(&n) >= 0.0);
    if inside {
        return (p - foot).norm();
    }
    segment_distance(p, a, b)
        .min(segment_distance(p, b, c))
        .min(segment_distance(p, c, a))
}

/// Linear scan over all triangles.
pub fn brute_distance(mesh: &TriMesh, p: &Vec3) -> f64 {
    (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.corners(t);
            triangle_distance(p, &a, &b, &c)
        })
        .fold(f64::INFINITY, f64::min)
}

/// True when the nearest surface point moves faster than the query somewhere
/// within `radius` of `p`. Over flat or convex patches the nearest-point map
/// is a contraction; a jump or a strong amplification marks a nearby medial
/// axis or its focal end. Probes the 26 lattice directions.
pub fn near_medial_axis(index: &snapforge::distfield::SurfaceIndex, p: &Vec3, radius: f64) -> bool {
    let here = index.nearest(p).unwrap().point;
    for dx in -1i32..=1 {
        for dy in -1i32..=1 {
            for dz in -1i32..=1 {
                if (dx, dy, dz) == (0, 0, 0) {
                    continue;
                }
                let off = Vec3::new(dx as f64, dy as f64, dz as f64).normalize() * radius;
                let there = index.nearest(&(p + off)).unwrap().point;
                if (there - here).norm() > 1.5 * radius {
                    return true;
                }
            }
        }
    }
    false
}
