//! Counter-style seed derivation.
//!
//! Every random stream in the crate is keyed by a base seed plus a path of
//! integers (layer, channel, draw index, ...). The stream for a given path
//! never depends on which thread consumes it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep unrelated consumers of the same base seed apart.
pub(crate) mod tag {
    pub const FILTER: u64 = 0x46_49_4c_54;
    pub const DRAW: u64 = 0x44_52_41_57;
    pub const GP: u64 = 0x47_50_53_4d;
    pub const MOMENT: u64 = 0x4d_4f_4d_54;
    pub const TRIAL: u64 = 0x54_52_49_41;
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and an index path.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix64(base), |acc, &p| mix64(acc ^ mix64(p.wrapping_add(0x632b_e59b_d9b4_e019))))
}

/// Independent generator for the given path.
pub fn stream(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}
