//! Seeded random streams.
//!
//! Every stochastic component draws from a [`Stream`] that is derived from
//! a textual key by hashing, so any run or instance can be regenerated in
//! isolation, independent of scheduling.

use std::fmt::Display;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

/// Derive a stream from a domain tag and an ordered list of key parts.
pub fn derive_stream(tag: &str, parts: &[&dyn Display]) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(tag.as_bytes());
    for part in parts {
        hasher.update([0x1f]);
        hasher.update(part.to_string().as_bytes());
    }
    let seed: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(seed)
}
