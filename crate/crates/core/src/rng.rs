//! Seed derivation for reproducible, order-independent random streams.
//!
//! Every random stream in the project (instance generation, initial states,
//! proposals, acceptance draws) is a [`ChaCha8Rng`] whose 64-bit seed is
//! derived from a tuple of indices by chaining [`splitmix64`] over the
//! components. A stream for realization `r` or repetition `k` can therefore
//! be constructed directly without generating the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// The splitmix64 finalizer.
pub const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed. Order matters.
pub fn mix(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x5350_494e_464c_4950, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// FNV-1a over a tag string, used for domain separation.
pub const fn tag_hash(tag: &str) -> u64 {
    let bytes = tag.as_bytes();
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    let mut i = 0;
    while i < bytes.len() {
        hash ^= bytes[i] as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        i += 1;
    }
    hash
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
