//! Deterministic seed derivation and shuffling.
//!
//! Every random decision in the toolkit flows from a single master seed through
//! [`derive_seed`], so independent substreams (per sample, per scenario, per
//! parameter tensor) never share state and results are reproducible down to the
//! byte regardless of evaluation order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer — a cheap, high-quality bit mixer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent substream seed from `(seed, stream, index)`.
///
/// `stream` namespaces the purpose (noise, shuffle, init, ...) and `index`
/// selects an element within it (sample index, epoch, ...). Distinct inputs
/// yield effectively uncorrelated outputs.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)) ^ index)
}

/// A ChaCha8 RNG seeded from a derived substream.
pub fn stream_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

/// FNV-1a hash of a byte string; used to give named parameter tensors stable,
/// collision-free substream ids.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// In-place Fisher–Yates shuffle.
///
/// Hand-rolled (rather than `rand::seq::SliceRandom`) so the byte-level output
/// is pinned by this crate, not by the rand crate's internal shuffle order.
pub fn shuffle<T>(v: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
}

/// Draws `count` distinct indices from `0..n`, in random order.
pub fn sample_indices(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    debug_assert!(count <= n);
    let mut all: Vec<usize> = (0..n).collect();
    shuffle(&mut all, rng);
    all.truncate(count);
    all
}
