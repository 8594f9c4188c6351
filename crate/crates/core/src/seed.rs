//! Stable seed derivation.
//!
//! Every random stream in the crate is keyed by a tuple (base seed, scene
//! index, rule name, ...). The mixing below is fixed forever so that reports
//! stay reproducible across platforms and toolchain versions; `std`'s
//! `DefaultHasher` gives no such guarantee.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// SplitMix64 finalizer.
pub fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine two 64-bit values into one well-mixed value. Not commutative.
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix(splitmix(a) ^ b.rotate_left(17) ^ 0x5851_f42d_4c95_7f2d)
}

/// FNV-1a over UTF-8 bytes.
pub fn hash_str(s: &str) -> u64 {
    s.bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Builder for a seed keyed by an ordered tuple of parts.
#[derive(Debug, Clone, Copy)]
pub struct SeedKey(u64);

impl SeedKey {
    pub fn new(base: u64) -> Self {
        SeedKey(splitmix(base))
    }

    pub fn with(self, part: u64) -> Self {
        SeedKey(mix(self.0, part))
    }

    pub fn with_str(self, part: &str) -> Self {
        self.with(hash_str(part))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Seed of the per-scene stream used by the generator.
pub fn scene_seed(base_seed: u64, scene_index: u64) -> u64 {
    SeedKey::new(base_seed).with(scene_index).value()
}
