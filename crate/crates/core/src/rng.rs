//! Reproducible random streams.
//!
//! Every generator derives its ChaCha stream from `(seed, kind tag,
//! parameters)` through SHA-256, so two generators never share a stream even
//! when called with the same user seed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha20Rng;

/// Builds the stream for generator `tag` with numeric parameters `params`.
pub fn stream(seed: u64, tag: &str, params: &[f64]) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((tag.len() as u64).to_le_bytes());
    hasher.update(tag.as_bytes());
    for p in params {
        hasher.update(p.to_bits().to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(key)
}
