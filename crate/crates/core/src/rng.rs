//! Seeded randomness used throughout the pipeline.
//!
//! Every random draw goes through [`seeded`], which returns a ChaCha8 stream
//! keyed by a 64-bit seed. ChaCha output is specified independently of the
//! platform, so a split built on one machine is reproduced bit-for-bit on
//! another. Shuffles use `rand`'s Fisher-Yates implementation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for `(seed, salt)` pairs, e.g. one per query record.
pub fn derived(seed: u64, salt: u64) -> Rng {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}
