//! The one random generator used throughout the crate.
//!
//! All sampling runs on ChaCha8 seeded from a `u64` via
//! `SeedableRng::seed_from_u64`, so a seed reproduces the same stream on every
//! platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeedRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeedRng {
    ChaCha8Rng::seed_from_u64(seed)
}
