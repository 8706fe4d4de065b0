//! Deterministic seed derivation.
//!
//! Every random stream in the crate is seeded from a master seed through
//! [`child_seed`], so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// A master seed from which named, indexed child streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn child(&self, tag: &str, index: u64) -> u64 {
        child_seed(self.master_seed, tag, index)
    }

    pub fn rng(&self, tag: &str, index: u64) -> ChaCha8Rng {
        rng_for(self.child(tag, index))
    }
}

/// Stable 64-bit hash of `(master, tag, index)`, chained through the
/// SplitMix64 finalizer one word at a time.
pub fn child_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ fnv1a(tag.as_bytes()));
    splitmix64(h ^ index)
}

/// Portable RNG for a derived seed.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
