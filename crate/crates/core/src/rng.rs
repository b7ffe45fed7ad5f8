//! Deterministic, purpose-tagged random streams.
//!
//! Every stochastic step derives its own ChaCha stream from `(seed, tag,
//! index)`, so reordering or parallelizing work never changes what any
//! individual step draws. Tags are short static strings ("noise", "radar",
//! "init", ...); the index distinguishes repeats (capture number, epoch, ...).
//!
//! # Example
//!
//! ```
//! use rand::Rng;
//! let mut a = specsense::rng::stream(7, "noise", 0);
//! let mut b = specsense::rng::stream(7, "noise", 0);
//! assert_eq!(a.gen::<u64>(), b.gen::<u64>());
//! ```

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stable 64-bit FNV-1a over a byte string. Used instead of `DefaultHasher`
/// because the derivation must not change across std versions.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 step, used to expand one 64-bit state into a full ChaCha key.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A ChaCha8 stream keyed by `(seed, tag, index)`.
pub fn stream(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    let mut bytes = Vec::with_capacity(16 + tag.len());
    bytes.extend_from_slice(&seed.to_le_bytes());
    bytes.extend_from_slice(tag.as_bytes());
    bytes.extend_from_slice(&index.to_le_bytes());
    let mut state = fnv1a(&bytes);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
