//! Seeded randomness.
//!
//! Every random decision in the workspace is drawn from [`ChaCha8Rng`], a
//! portable generator whose stream is identical on every platform for a given
//! seed. Independent streams are derived with [`derive_seed`].

pub use rand_chacha::ChaCha8Rng as Rng;
use rand::SeedableRng;

/// Creates the workspace generator from a 64-bit seed.
pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a path of indices.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed), |acc, &p| mix64(acc ^ mix64(p)))
}
