//! Keyed deterministic random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose key
//! is a SHA-256 hash of (seed, domain tag, integer payload). Streams are pure
//! functions of their key, so queries are reproducible in any order and safe
//! to evaluate concurrently.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const TAG_STATIC_EDGE: u8 = 1;
pub const TAG_RENEWAL_BLOCK: u8 = 2;
pub const TAG_RENEWAL_FALLBACK: u8 = 3;
pub const TAG_LAYER: u8 = 4;
pub const TAG_PATH: u8 = 5;
pub const TAG_REPLICA: u8 = 6;

pub fn stream(seed: u64, tag: u8, payload: &[i64]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([tag]);
    for v in payload {
        h.update(v.to_le_bytes());
    }
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..]);
    ChaCha8Rng::from_seed(key)
}

/// Derived seed for replica `i` of a master seed.
pub fn replica_seed(master: u64, i: u64) -> u64 {
    use rand::RngCore;
    stream(master, TAG_REPLICA, &[i as i64]).next_u64()
}
