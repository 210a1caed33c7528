//! Seed derivation for reproducible Monte-Carlo streams.
//!
//! Every random stream is keyed by a 64-bit seed obtained by hashing a parent
//! seed with an index:
//!
//! ```text
//! mix64(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!            return z ^ (z >> 31)                      (wrapping u64 arithmetic)
//! derive(parent, index) = mix64(parent ^ mix64(index + 0x9E3779B97F4A7C15))
//! frame_seed(master, position, frame) = derive(derive(master, position), frame)
//! ```
//!
//! The per-seed generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn derive(parent: u64, index: u64) -> u64 {
    mix64(parent ^ mix64(index.wrapping_add(GOLDEN_GAMMA)))
}

/// Seed of speckle frame `frame` at scan position `position`.
#[inline]
pub fn frame_seed(master: u64, position: u64, frame: u64) -> u64 {
    derive(derive(master, position), frame)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
