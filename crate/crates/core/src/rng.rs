//! Seed splitting and the portable scenario generator.
//!
//! Everything random in a scenario is drawn from [`SplitMix64`], so any
//! implementation that follows the steps below reproduces the same scenario
//! set bit for bit:
//!
//! * state advance: `state = state + 0x9E3779B97F4A7C15` (wrapping)
//! * output: `z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >> 31)` (wrapping)
//! * uniform double in `[0, 1)`: `(next_u64 >> 11) * 2^-53`
//! * per-run seed: `split(seed, i)` is the `(i + 1)`-th output of a generator
//!   whose initial state is `seed`, i.e. `mix(seed + (i + 1) * GAMMA)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the independent seed of run `index` from a batch seed.
pub fn split(seed: u64, index: u64) -> u64 {
    mix(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)))
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Noise source for sensor models; seeded through [`split`] so that
/// independent streams never share state.
pub fn noise_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split(seed, stream))
}
