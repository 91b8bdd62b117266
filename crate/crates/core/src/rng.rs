//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! user seed and placed on a stream selected by a *path* of integers (purpose
//! tag, condition index, repetition, resample, ...). The stream id is the
//! path folded through SplitMix64, so the draws for one path never depend on
//! which other paths were evaluated first, or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags used as the first path element.
pub mod tag {
    pub const SIGNAL_WINDOW: u64 = 1;
    pub const ESTIMATION_WINDOW: u64 = 2;
    pub const BOOTSTRAP: u64 = 3;
    pub const SUBSAMPLE: u64 = 4;
    pub const CI_SEED: u64 = 5;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for a path.
pub fn stream_id(path: &[u64]) -> u64 {
    path.iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Generator for `(seed, path)`.
pub fn stream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(path));
    rng
}

/// Derive a child seed, for handing to code that takes a plain `u64` seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    splitmix64(seed ^ stream_id(path))
}
