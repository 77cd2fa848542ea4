//! Deterministic seed derivation.
//!
//! Every source of randomness in the crate is a ChaCha stream seeded through
//! [`derive_seed`] from a single master seed, a purpose label, and an index.
//! The derivation is a fixed splitmix-style mix so that reports are
//! reproducible across platforms and the label keeps independent pipeline
//! stages from sharing streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes `(master, label, index)` into a child seed.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut acc = splitmix(master);
    for chunk in label.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        acc = splitmix(acc ^ u64::from_le_bytes(word));
    }
    splitmix(acc ^ index)
}

/// A seeded generator for one purpose-labelled stream.
pub fn rng_for(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, label, index))
}

/// 64-bit FNV-1a over bytes, used for report integrity hashes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
