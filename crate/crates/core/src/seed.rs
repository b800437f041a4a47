//! Seed derivation. Every random stream in a run is derived from a single
//! master seed so that serial and parallel schedules agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags for derived seeds.
pub mod stream {
    pub const SMOTE: u64 = 1;
    pub const FOREST: u64 = 2;
    pub const RANDOM_PLAN: u64 = 3;
    pub const TREE: u64 = 4;
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, stream: u64) -> u64 {
    mix(master ^ mix(stream))
}

/// 64-bit FNV-1a of a unit name; stable across platforms and releases.
pub fn name_hash(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for an explanation of one unit: master seed XOR the name hash.
pub fn instance_seed(master: u64, name: &str) -> u64 {
    master ^ name_hash(name)
}
