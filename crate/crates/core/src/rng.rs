//! The single seedable randomness source threaded through every operation.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type DeterministicRng = ChaCha20Rng;

/// Build a ChaCha20 stream from an arbitrary-length seed.
pub fn from_seed(seed: &[u8]) -> DeterministicRng {
    let key: [u8; 32] = Sha256::digest(seed).into();
    ChaCha20Rng::from_seed(key)
}

/// Derive an independent child stream, e.g. one per simulated actor.
pub fn derive(seed: &[u8], label: &str) -> DeterministicRng {
    let mut hasher = Sha256::new();
    hasher.update((seed.len() as u64).to_be_bytes());
    hasher.update(seed);
    hasher.update(label.as_bytes());
    ChaCha20Rng::from_seed(hasher.finalize().into())
}
