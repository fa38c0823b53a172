//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha8. A stream is named by a
//! 64-bit seed plus a 64-bit stream number, so sample `m` of a batch always
//! reads the same words no matter which thread draws it.
//!
//! Child seeds (one per sweep point, or the batch seed of a sweep point) are
//! derived with [`derive_seed`], a SplitMix64 finalizer over `parent ^ key`
//! rotated through the golden-ratio increment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream number reserved for weight-table generation. Sample streams use
/// the sample index, so a table and a batch built from the same seed never
/// share words unless the batch holds 2^64 samples.
pub const TABLE_STREAM: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministically mixes a parent seed with a key into a child seed.
pub fn derive_seed(parent: u64, key: u64) -> u64 {
    splitmix64(parent.wrapping_add(GOLDEN_GAMMA.wrapping_mul(key.wrapping_add(1))))
}

/// Independent stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
