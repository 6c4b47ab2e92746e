//! Seeded RNG streams.
//!
//! Every independently sampled object (circuit `i`, data column `j`, ...) gets
//! its own ChaCha8 stream keyed by `(master_seed, index)`, so results never
//! depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit key for substream `index` of `master_seed`.
pub fn substream_seed(master_seed: u64, index: u64) -> u64 {
    mix64(mix64(master_seed).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

pub fn substream(master_seed: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(substream_seed(master_seed, index))
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
