//! Seeded randomness.
//!
//! Every random draw in the crate comes from ChaCha8 keyed by a `u64` seed,
//! with a fixed stream id per purpose. ChaCha is counter-based: the word at
//! position `k` of stream `s` depends only on `(seed, s, k)`, so trial `t` of
//! an event-sampling run always consumes words `2t` and `2t + 1` of
//! [`EVENT_STREAM`] no matter how the trials are partitioned across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream for Monte Carlo event sampling.
pub const EVENT_STREAM: u64 = 1;
/// Stream for superposition coefficient sampling.
pub const COEFFICIENT_STREAM: u64 = 2;
/// Stream for random operator and state generation.
pub const GENERATOR_STREAM: u64 = 3;

pub type Rng = ChaCha8Rng;

/// Generator for `(seed, stream)`, positioned at word 0.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for `(seed, stream)` positioned at the first word of trial `trial`
/// (two 32-bit words per trial).
pub fn trial_stream(seed: u64, stream: u64, trial: u64) -> Rng {
    let mut rng = substream(seed, stream);
    rng.set_word_pos(2 * u128::from(trial));
    rng
}

/// Child seed for item `index` of a seeded family (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform `[0, 1)` from the top 53 bits of a word.
pub fn unit_interval(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
