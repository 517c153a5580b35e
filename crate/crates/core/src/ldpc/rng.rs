//! Seeded randomness for code construction.
//!
//! Generator id 1 is xoshiro256++ whose state is filled from the 64-bit seed
//! by SplitMix64. Bounded draws use Lemire's multiply-shift with rejection,
//! and shuffles are Fisher–Yates from the top index down. Another
//! implementation following these three rules reproduces our matrices.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub const RNG_ID: u8 = 1;

pub struct CodeRng(Xoshiro256PlusPlus);

impl CodeRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in 0..bound.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(bound);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
