//! Counter-derived random streams.
//!
//! Every random consumer gets a `ChaCha8Rng` seeded from the master seed and
//! a 64-bit stream id. Stream ids are built as `(tag << 48) | index`, so
//! results never depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags, one per consumer family.
pub mod tag {
    pub const PACKING: u64 = 1;
    pub const FIELD: u64 = 2;
    pub const EXTEND: u64 = 3;
    pub const BM: u64 = 4;
    pub const RADIAL: u64 = 5;
    pub const BRIDGE: u64 = 6;
    pub const FK_PATH: u64 = 7;
    pub const FK_FIELD: u64 = 8;
    pub const FUZZ: u64 = 9;
    pub const PROBE: u64 = 10;
    pub const IS: u64 = 11;
    pub const EXIT: u64 = 12;
}

pub fn stream(seed: u64, tag: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 48) ^ index);
    rng
}

/// Derive a child seed, used when a whole sub-experiment needs its own master seed.
pub fn child_seed(seed: u64, tag: u64, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, tag, index).next_u64()
}
