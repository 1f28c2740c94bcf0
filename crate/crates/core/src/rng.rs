//! Seeded randomness shared by corpus splitting, weight init, and batch order.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood 2014) as provided by
//! `rand_xoshiro`. Bounded draws use the widening multiply
//! `(x * n) >> 64` on the raw 64-bit output, and uniforms in `[0, 1)` take the
//! top 53 bits. Both are simple enough to reproduce bit-for-bit elsewhere.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Name recorded in corpus/split metadata so other implementations can match.
pub const SHUFFLE_ALGORITHM: &str = "splitmix64+fisher-yates(mulhi)";

/// Deterministic 64-bit generator.
#[derive(Debug, Clone)]
pub struct DetRng(SplitMix64);

impl DetRng {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Integer in `0..n`. `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform in `[0, 1)`.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-bound, bound)`.
    pub fn symmetric(&mut self, bound: f64) -> f64 {
        (2.0 * self.unit_f64() - 1.0) * bound
    }

    /// In-place Fisher–Yates, walking from the last index down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// A shuffled `0..n` index permutation.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}
