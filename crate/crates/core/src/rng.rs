//! Seeded random streams.
//!
//! Every draw in the crate comes from a `Xoshiro256PlusPlus` generator. Stream
//! `i` under master seed `s` is seeded with `mix(s, i)`, where `mix` combines
//! the two with the SplitMix64 finalizer. Sample `i` of a Monte Carlo run
//! always uses stream `i`, so results do not depend on how samples are split
//! across threads.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `stream` under master seed `seed`.
pub fn mix(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> StreamRng {
    StreamRng::seed_from_u64(mix(seed, stream))
}
