//! Seeded, order-independent random streams.
//!
//! Every random draw in the toolkit comes from a ChaCha stream whose seed is
//! derived from the run seed plus a key naming the draw (record id,
//! technique, language, ...). Draws for one key never depend on how many
//! draws were made for another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const DEFAULT_SEED: u64 = 42;

pub fn derive_seed(seed: u64, key: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for part in key {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn rng_for(seed: u64, key: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, key))
}
