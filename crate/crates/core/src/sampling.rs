//! Seeded samplers for probe points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 42;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateBox {
    pub bounds: Vec<(f64, f64)>,
}

impl CoordinateBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Self { bounds }
    }

    /// The same half-width `h` around every centre coordinate.
    pub fn around(center: &[f64], h: f64) -> Self {
        Self { bounds: center.iter().map(|&c| (c - h, c + h)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo }).collect()
    }
}

/// Draws `count` points from `region` that satisfy `accept`, deterministically
/// for a given seed. Gives up after `100 * count` rejected draws.
pub fn rejection_sample(
    region: &CoordinateBox,
    count: usize,
    seed: u64,
    accept: impl Fn(&[f64]) -> bool,
) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0usize;
    while out.len() < count && rejected < 100 * count.max(1) {
        let x = region.sample(&mut r);
        if accept(&x) {
            out.push(x);
        } else {
            rejected += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_reproducible_and_respects_box() {
        let b = CoordinateBox::new(vec![(-1.0, 1.0), (2.0, 3.0)]);
        let a = rejection_sample(&b, 20, 7, |x| x[0] > -0.5);
        let c = rejection_sample(&b, 20, 7, |x| x[0] > -0.5);
        assert_eq!(a, c);
        assert_eq!(a.len(), 20);
        assert!(a.iter().all(|x| x[0] > -0.5 && x[0] < 1.0 && (2.0..3.0).contains(&x[1])));
    }
}
