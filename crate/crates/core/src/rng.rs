//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`]. Its output is
//! specified by the ChaCha stream cipher, so a given seed replays the same
//! numbers on every platform. Sub-seeds for individual experiments are derived
//! with SplitMix64 finalization over the identifying parts of the job.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as Rng;

/// Creates the generator for a 64-bit seed.
pub fn from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a hash of a tag string. Stable across builds.
pub fn tag_hash(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives a child seed from a master seed and an ordered list of components.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_replay() {
        let mut a = from_seed(7);
        let mut b = from_seed(7);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn derived_seeds_depend_on_order() {
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
        assert_eq!(derive_seed(5, &[tag_hash("hoho")]), derive_seed(5, &[tag_hash("hoho")]));
        assert_ne!(tag_hash("qaoa"), tag_hash("tqaoa"));
    }
}
