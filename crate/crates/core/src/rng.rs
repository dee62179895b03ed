//! Seeded, platform-independent random streams.
//!
//! All randomness in the crate flows through `ChaCha8Rng`. Monte-Carlo
//! trial `k` of a run seeded with `seed` draws from the stream
//! `stream(seed, k)`, i.e. `ChaCha8Rng::seed_from_u64(seed ^ k)`, so results
//! are identical for any degree of parallelism.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream-splitting rule: substream `index` of `seed` is seeded with
/// `seed ^ index`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}
