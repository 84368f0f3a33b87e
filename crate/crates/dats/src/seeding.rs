//! Deterministic seed derivation.
//!
//! All randomness in the crate flows from explicit `u64` seeds through these
//! helpers. Derived streams are independent of thread scheduling, so parallel
//! and serial execution of the same experiment produce identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Good avalanche behaviour, cheap, stable.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `(base, tag, index)`.
///
/// `tag` namespaces the consumer (planner, resets, bootstrap, ...) so two
/// consumers indexed the same way never share a stream.
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base ^ tag.rotate_left(17)).wrapping_add(index))
}

/// A seeded generator for the derived stream `(base, tag, index)`.
pub fn derived_rng(base: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tag, index))
}

/// A seeded generator directly from a seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream tags used across the crate.
pub mod tags {
    pub const RESET: u64 = 0x5245_5345_54;
    pub const PLAN: u64 = 0x504c_414e;
    pub const CANDIDATE: u64 = 0x4341_4e44;
    pub const PREFIX: u64 = 0x5052_4546;
    pub const TRAIN: u64 = 0x5452_4149;
    pub const MEMBER_INIT: u64 = 0x4d49_4e49;
    pub const CONTROLLER: u64 = 0x4354_524c;
    pub const EVAL: u64 = 0x4556_414c;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_is_deterministic() {
        assert_eq!(derive_seed(7, 1, 42), derive_seed(7, 1, 42));
        assert_ne!(derive_seed(7, 1, 42), derive_seed(7, 1, 43));
        assert_ne!(derive_seed(7, 1, 42), derive_seed(7, 2, 42));
        assert_ne!(derive_seed(7, 1, 42), derive_seed(8, 1, 42));
    }

    #[test]
    fn distinct_tags_decorrelate_consecutive_indices() {
        // Not a statistical test, just a collision sanity check over a small window.
        let mut seen = std::collections::HashSet::new();
        for tag in [tags::RESET, tags::PLAN, tags::CANDIDATE, tags::TRAIN] {
            for idx in 0..1000 {
                assert!(seen.insert(derive_seed(123, tag, idx)));
            }
        }
    }
}
