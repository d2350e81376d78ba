//! Seeded randomness. Every generator in the crate is a ChaCha8 stream seeded
//! from a 64-bit value, and sub-streams are derived by mixing a label into the
//! parent seed so each trial or stage can be replayed on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sub-stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(master ^ mix(stream))
}

pub mod streams {
    pub const SAMPLE: u64 = 1;
    pub const KMEANS: u64 = 2;
    pub const CAPACITY: u64 = 3;
    pub const SYNTH: u64 = 4;
    pub const SCENARIO: u64 = 5;
    pub const BOOTSTRAP: u64 = 6;
}
