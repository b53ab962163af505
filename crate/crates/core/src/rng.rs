//! Seedable, portable random source for simulations.
//!
//! The generator is xoshiro256++ seeded through SplitMix64 (the
//! `seed_from_u64` convention of `rand_xoshiro`). Every derived variate is
//! computed here from raw `u64` outputs with fixed formulas, so a trace can be
//! reproduced bit-for-bit by any implementation of the same algorithms:
//!
//! * uniform on `[0, 1)`: `(x >> 11) * 2^-53`
//! * exponential with rate `r`: `-ln(1 - u) / r`
//! * integer on `[0, n)`: rejection of `x >= n * floor(2^64 / n)`, then `x % n`

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: Xoshiro256PlusPlus,
}

impl SimRng {
    pub fn seeded(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform double on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_MINUS_53
    }

    /// Exponential variate with the given rate (mean `1 / rate`).
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -(1.0 - self.uniform()).ln() / rate
    }

    /// Unbiased integer on `[0, n)`. `n` must be positive.
    pub fn index_below(&mut self, n: usize) -> usize {
        assert!(n > 0, "index_below requires a non-empty range");
        let n = n as u64;
        // Largest multiple of n that fits in u64 (as an exclusive bound).
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return (x % n) as usize;
            }
        }
    }
}

/// Seed for replica `index` of a batch started from `base`.
///
/// Replica 0 keeps the base seed; later replicas step by the 64-bit golden
/// ratio so their streams are decorrelated by SplitMix64 seeding.
pub fn replica_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
