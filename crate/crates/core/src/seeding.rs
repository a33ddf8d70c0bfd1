//! Counter-based seed derivation for parallel-invariant random streams.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

/// Trial-level generator.
pub type TrialRng = Xoshiro256StarStar;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for stream `(a, b)` under `master`.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(mix64(master) ^ a) ^ b)
}

pub fn stream(master: u64, a: u64, b: u64) -> TrialRng {
    TrialRng::seed_from_u64(derive_seed(master, a, b))
}
