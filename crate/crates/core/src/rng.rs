//! Seeded random streams.
//!
//! Every sampling routine takes an explicit [`Stream`]. Independent streams
//! for parallel work are derived from a root seed and a path of integer keys
//! (cell, replicate, split, ...), so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Counter-based generator used for all sampling.
pub type Stream = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for job `index` under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ mix(index.wrapping_add(0xA076_1D64_78BD_642F))
}

/// Stream keyed by `seed` alone.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `index` of the family rooted at `seed`. Distinct indices give
/// non-overlapping ChaCha streams under the same key.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
