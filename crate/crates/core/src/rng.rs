//! Seedable 64-bit generator shared by every randomized input.
//!
//! The generator is SplitMix64 (Steele, Lea and Flood), defined so that any
//! language can reproduce the exact stream from a seed:
//!
//! ```text
//! state  <- state + 0x9E3779B97F4A7C15          (wrapping)
//! z      <- state
//! z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 (wrapping)
//! z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB (wrapping)
//! output <- z ^ (z >> 31)
//! ```
//!
//! Doubles in `[0, 1)` take the top 53 bits: `(output >> 11) * 2^-53`.
//! A child generator is split off by seeding it with the parent's next output.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform double in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[low, high)`.
    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.next_f64()
    }

    /// Uniform integer in `[low, high]`, by rejection on the top bits.
    pub fn uniform_int(&mut self, low: u64, high: u64) -> u64 {
        debug_assert!(low <= high);
        let span = high - low;
        if span == u64::MAX {
            return self.next_u64();
        }
        let bound = span + 1;
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return low + x % bound;
            }
        }
    }

    pub fn split(&mut self) -> Self {
        Self::new(self.next_u64())
    }

    pub fn fill_uniform(&mut self, len: usize, low: f64, high: f64) -> Vec<f64> {
        (0..len).map(|_| self.uniform(low, high)).collect()
    }
}

/// The SplitMix64 output finalizer, also used to derive per-trial seeds.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent stream derived from `seed`.
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}
