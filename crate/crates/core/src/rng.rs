//! The portable seeded generator used for every random corpus.
//!
//! ChaCha8 produces the same stream on every platform and in every release of
//! `rand_chacha` 0.9, so reports built from a seed are reproducible byte for byte.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for sub-task `index` of a seeded job.
pub fn derived(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index + 1);
    rng
}
