//! Counter-based random streams.
//!
//! Every random draw is addressed by `(seed, stream, counter)`. The draw is a
//! pure function of that triple, so results never depend on evaluation order
//! or on how work is split across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Offset separating auxiliary-site counters from lattice-site counters.
pub const AUX_SITE_OFFSET: u64 = 1 << 40;

/// Raw 64-bit word at position `counter` of stream `stream`.
pub fn word(seed: u64, stream: u64, counter: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(counter) * 2);
    rng.next_u64()
}

/// Uniform draw in `[0, 1)` with 53 random bits.
pub fn uniform(seed: u64, stream: u64, counter: u64) -> f64 {
    (word(seed, stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential generator for construction code that consumes a variable
/// number of draws (rejection sampling). Still fully determined by the seed.
pub fn sequential(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
