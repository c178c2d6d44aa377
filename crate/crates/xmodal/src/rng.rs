//! Deterministic random stream derivation.
//!
//! Every source of randomness in the crate is a [`RngStream`] derived from
//! `(master_seed, label, index)`. Streams for distinct triples are
//! independent, so work items can run in any order or thread without
//! affecting results.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;
use sha2::{Digest, Sha256};

/// Counter-based generator used throughout the crate.
pub type RngStream = ChaCha12Rng;

/// Derives an independent random stream from the master seed, a purpose
/// label, and an index.
///
/// The derivation hashes the triple, so streams do not collide even when
/// labels share prefixes or indices overlap across labels.
pub fn derive_rng_stream(master_seed: u64, label: &str, index: u64) -> RngStream {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update([0x1f]);
    hasher.update(label.as_bytes());
    hasher.update([0x1f]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest[..32]);
    ChaCha12Rng::from_seed(seed)
}
