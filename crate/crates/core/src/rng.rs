//! Seeded random streams.
//!
//! Every random quantity in an experiment comes from a ChaCha20 generator
//! keyed by the experiment seed, with the 64-bit stream id
//! `purpose << 32 | index`. ChaCha is counter based, so streams for
//! different (purpose, round) pairs never overlap and can be generated in
//! any order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Recorded in run metadata for provenance.
pub const GENERATOR_NAME: &str = "rand_chacha::ChaCha20Rng/seed_from_u64/stream=(purpose<<32|index)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Purpose {
    Objective = 1,
    Candidates = 2,
    Sampling = 3,
    Noise = 4,
    Diagnostics = 5,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | (index & 0xffff_ffff));
    rng
}

/// A 32-bit seed for the scrambled sequence generator.
pub fn derive_u32(seed: u64, purpose: Purpose, index: u64) -> u32 {
    stream(seed, purpose, index).next_u32()
}
