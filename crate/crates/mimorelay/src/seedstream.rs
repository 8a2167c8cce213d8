//! Deterministic per-trial RNG substreams.
//!
//! Every Monte Carlo trial gets its own ChaCha stream derived from
//! `(seed, label, trial index)` through SHA-256, so the result of a run is
//! identical for any worker count and any trial execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// RNG for one trial of one named stream.
pub fn trial_rng(seed: u64, label: &str, trial: u64) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(label.as_bytes());
    hasher.update([0u8]);
    hasher.update(trial.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}
