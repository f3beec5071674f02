//! Deterministic seed derivation.
//!
//! Every stochastic component takes an explicit seed, and sub-streams
//! (videos in a corpus, draws in a Monte-Carlo loop, epochs in training)
//! derive their own seed from the parent seed and an index. The mixing
//! function is splitmix64, so nearby (seed, index) pairs land far apart.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent child seed from a base seed and a stream index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base).wrapping_add(index))
}

/// Two-level variant for nested streams, e.g. (experiment, cell, video).
pub fn derive_seed2(base: u64, outer: u64, inner: u64) -> u64 {
    derive_seed(derive_seed(base, outer), inner)
}
