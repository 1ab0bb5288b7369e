//! Deterministic per-stream seeding.
//!
//! Stream `i` of a run with base seed `s` is driven by a ChaCha8 generator
//! seeded with `splitmix64(s ^ splitmix64(i))`, so results never depend on
//! how streams are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base_seed: u64, stream: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(stream))
}

pub fn stream_rng(base_seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base_seed, stream))
}
