//! Deterministic, portable randomness.
//!
//! Every randomized operation in this crate takes an explicit 64-bit seed and
//! runs a ChaCha stream cipher generator, so results are reproducible across
//! runs and platforms. Sub-computations derive their own seeds from a master
//! seed plus context tags, which keeps them independent of execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The one pseudo-random generator used everywhere in this workspace.
pub type Prng = ChaCha8Rng;

/// Seed a fresh generator.
pub fn prng(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// Derive a child seed from a master seed and a sequence of context tags.
///
/// The derivation hashes the tag list with separators, so `["ab", "c"]` and
/// `["a", "bc"]` produce different seeds.
pub fn child_seed(master: u64, tags: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    for tag in tags {
        hasher.update([0xff]);
        hasher.update(tag.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 yields 32 bytes"))
}
