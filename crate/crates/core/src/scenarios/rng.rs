use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// The generators' random source: a ChaCha8 stream seeded with
/// `ChaCha8Rng::seed_from_u64(seed)`. Integers in `0..n` come from
/// rejection sampling on `next_u64` so no value is favoured, and every real
/// number drawn is a point of a dyadic lattice, which keeps inverses and
/// fixed points exact in floating point.
#[derive(Clone, Debug)]
pub struct ScenarioRng(ChaCha8Rng);

impl ScenarioRng {
    pub fn new(seed: u64) -> Self {
        ScenarioRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let limit = u64::MAX - u64::MAX % n;
        loop {
            let v = self.0.next_u64();
            if v < limit {
                return (v % n) as usize;
            }
        }
    }

    /// Uniform point of `{lo, lo + step, ..., hi}`.
    pub fn lattice(&mut self, lo: f64, hi: f64, step: f64) -> f64 {
        let count = ((hi - lo) / step).round() as usize + 1;
        lo + self.below(count) as f64 * step
    }

    /// Like [`lattice`](Self::lattice) but never zero.
    pub fn nonzero_lattice(&mut self, lo: f64, hi: f64, step: f64) -> f64 {
        loop {
            let v = self.lattice(lo, hi, step);
            if v != 0.0 {
                return v;
            }
        }
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    /// `true` with probability `num / den`.
    pub fn chance(&mut self, num: usize, den: usize) -> bool {
        self.below(den) < num
    }

    /// A power-of-two magnitude in `{1/2, 1, 2}` with random sign.
    pub fn dyadic_scale(&mut self) -> f64 {
        let m = *self.pick(&[0.5, 1.0, 2.0]);
        if self.chance(1, 2) {
            -m
        } else {
            m
        }
    }
}
