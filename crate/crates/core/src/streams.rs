//! Deterministic derivation of named RNG streams from a base seed.
//!
//! Every random object in a run (a sampled path, a basis draw, a Metropolis
//! chain) gets its own ChaCha stream keyed by (seed, domain, index), so
//! results never depend on scheduling order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DOMAIN_PATH: u64 = 0x7061_7468; // "path"
pub const DOMAIN_CHAIN: u64 = 0x6d63_6d63; // Metropolis chain
pub const DOMAIN_BASIS: u64 = 0x6261_7369; // stochastic basis draws

/// splitmix64 finalizer; bijective, full-avalanche mixing of one word.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child key from a base seed and two tags.
pub fn stream_key(seed: u64, a: u64, b: u64) -> u64 {
    mix(mix(mix(seed) ^ a) ^ b)
}

/// ChaCha8 stream for (seed, domain, index).
pub fn rng_for(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, domain, index))
}
