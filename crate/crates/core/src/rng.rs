//! Seedable key-stream generator and the per-trial seed split.
//!
//! The generator is xoshiro256++ seeded through SplitMix64 (the reference
//! `seed_from_u64` expansion). Uniform reals take the top 53 bits of each
//! 64-bit output, `(x >> 11) * 2^-53`, so any implementation of the same two
//! algorithms reproduces every stream bit for bit.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Golden-ratio increment used to spread trial indices over the seed space.
pub const TRIAL_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of trial `trial` in a run started from `base_seed`.
pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    base_seed ^ trial.wrapping_mul(TRIAL_SEED_STRIDE)
}

#[derive(Debug, Clone)]
pub struct KeyRng(Xoshiro256PlusPlus);

impl KeyRng {
    pub fn new(seed: u64) -> Self {
        KeyRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..bound` as `floor(u * bound)`. `bound` must be positive.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        let idx = (self.next_f64() * bound as f64) as usize;
        idx.min(bound - 1)
    }
}
