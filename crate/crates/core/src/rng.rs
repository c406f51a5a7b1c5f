//! Seeded random streams.
//!
//! Every stochastic routine takes a `u64` seed and draws from a ChaCha8
//! generator. Independent sub-streams (per trial, per candidate bandwidth,
//! per cluster) use ChaCha's 64-bit stream selector, so a `(seed, stream)`
//! pair always reproduces the same sequence regardless of scheduling.
//! Normal deviates come from `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed from a master seed and an index (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
