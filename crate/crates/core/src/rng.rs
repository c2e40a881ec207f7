//! Seeded random streams.
//!
//! Every worker or chain owns its own ChaCha stream derived from the master
//! seed, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Master stream for a run.
pub fn master(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index + 1);
    rng
}

/// `count` independent streams, indexed from `offset`.
pub fn streams(seed: u64, offset: u64, count: usize) -> Vec<StreamRng> {
    (0..count as u64).map(|i| stream(seed, offset + i)).collect()
}

/// Uniform integer in the inclusive range.
pub fn uniform_int<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> i64 {
    if lo >= hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}
