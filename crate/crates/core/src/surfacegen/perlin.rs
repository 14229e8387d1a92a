use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Classic 2D gradient noise over a seeded permutation table.
#[derive(Clone, Debug)]
pub struct Perlin {
    perm: [u8; 512],
}

const GRADIENTS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    ),
    (
        -std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    ),
    (
        std::f64::consts::FRAC_1_SQRT_2,
        -std::f64::consts::FRAC_1_SQRT_2,
    ),
    (
        -std::f64::consts::FRAC_1_SQRT_2,
        -std::f64::consts::FRAC_1_SQRT_2,
    ),
];

impl Perlin {
    pub fn new(seed: u64) -> Self {
        let mut table: Vec<u8> = (0..=255).collect();
        table.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut perm = [0u8; 512];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = table[i & 255];
        }
        Self { perm }
    }

    /// Noise value at `(x, y)`, roughly in `[-1, 1]`; zero on integer lattice points.
    pub fn noise(&self, x: f64, y: f64) -> f64 {
        let xf = x.floor();
        let yf = y.floor();
        let xi = (xf as i64 & 255) as usize;
        let yi = (yf as i64 & 255) as usize;
        let dx = x - xf;
        let dy = y - yf;

        let hash = |i: usize, j: usize| self.perm[self.perm[i] as usize + j] as usize & 7;
        let dot = |h: usize, px: f64, py: f64| {
            let (gx, gy) = GRADIENTS[h];
            gx * px + gy * py
        };

        let n00 = dot(hash(xi, yi), dx, dy);
        let n10 = dot(hash(xi + 1, yi), dx - 1.0, dy);
        let n01 = dot(hash(xi, yi + 1), dx, dy - 1.0);
        let n11 = dot(hash(xi + 1, yi + 1), dx - 1.0, dy - 1.0);

        let u = fade(dx);
        let v = fade(dy);
        let nx0 = lerp(n00, n10, u);
        let nx1 = lerp(n01, n11, u);
        // max |value| of 2D gradient noise is sqrt(2)/2; rescale to [-1, 1].
        lerp(nx0, nx1, v) * std::f64::consts::SQRT_2
    }

    /// Fractal sum of `octaves` noise layers, each doubling frequency.
    pub fn fbm(&self, x: f64, y: f64, octaves: u32, persistence: f64) -> f64 {
        let mut total = 0.0;
        let mut amp = 1.0;
        let mut freq = 1.0;
        for _ in 0..octaves {
            total += amp * self.noise(x * freq, y * freq);
            amp *= persistence;
            freq *= 2.0;
        }
        total
    }
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_on_lattice() {
        let p = Perlin::new(7);
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(p.noise(i as f64, j as f64), 0.0);
            }
        }
    }

    #[test]
    fn bounded_and_seeded() {
        let a = Perlin::new(42);
        let b = Perlin::new(42);
        let c = Perlin::new(43);
        let mut differs = false;
        for k in 0..1000 {
            let x = k as f64 * 0.137;
            let y = k as f64 * 0.291;
            let v = a.noise(x, y);
            assert!(v.abs() <= 1.0 + 1e-12);
            assert_eq!(v.to_bits(), b.noise(x, y).to_bits());
            differs |= v != c.noise(x, y);
        }
        assert!(differs);
    }

    #[test]
    fn continuous_across_cells() {
        let p = Perlin::new(3);
        let eps = 1e-7;
        for k in 1..20 {
            let x = k as f64;
            let y = 0.37 * k as f64;
            assert!((p.noise(x - eps, y) - p.noise(x + eps, y)).abs() < 1e-5);
        }
    }
}
