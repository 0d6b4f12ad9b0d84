//! Seeded randomness.
//!
//! Every stochastic step (splits, shuffles, initialization, synthetic jitter and
//! noise) draws from SplitMix64 through the helpers below. The helpers are
//! spelled out instead of delegated to `rand` distributions so the exact
//! sequence can be reproduced from the algorithm description alone:
//!
//! * `uniform()` = `(next_u64 >> 11) * 2^-53`, in `[0, 1)`
//! * `below(n)` = high 64 bits of `next_u64 * n` (128-bit product)
//! * `shuffle` = Fisher-Yates from the last index down, swapping `i` with `below(i + 1)`
//! * `normal()` = Box-Muller cosine branch on `u1 = 1 - uniform()`, `u2 = uniform()`

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(SplitMix64::seed_from_u64(seed))
    }

    /// Independent stream for a sub-task, e.g. one record of a dataset.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut mixer = Rng::new(seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        Rng::new(mixer.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
