//! Seed expansion into independent per-chain streams.
//!
//! A run has one global seed. Chain `k` draws from ChaCha8 keyed by that seed
//! with stream id `k`, so results do not depend on how chains are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

/// Name of the splitting scheme, echoed into output headers.
pub const SPLIT_SCHEME: &str = "chacha8(seed).set_stream(chain)";

pub fn chain_rng(seed: u64, chain: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Derives a sub-seed for a labelled task (scan point, observable) from the
/// global seed. SplitMix64 finaliser over `seed ^ label`.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
