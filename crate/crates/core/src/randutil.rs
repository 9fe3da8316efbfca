//! Seeded randomness helpers shared by the sampling code paths.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The PRNG used everywhere a seed is accepted. Deterministic across
/// platforms for a fixed seed.
pub type Prng = ChaCha8Rng;

pub fn prng(seed: u64) -> Prng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `n` distinct values uniformly from `0..range` without materializing
/// the range (sparse partial Fisher-Yates). Panics if `n > range`.
pub fn sample_distinct(range: u64, n: u64, rng: &mut impl Rng) -> Vec<u64> {
    assert!(n <= range);
    let mut displaced: BTreeMap<u64, u64> = BTreeMap::new();
    let mut out = Vec::with_capacity(n as usize);
    for i in 0..n {
        let j = rng.random_range(i..range);
        let pick = displaced.get(&j).copied().unwrap_or(j);
        let at_i = displaced.get(&i).copied().unwrap_or(i);
        displaced.insert(j, at_i);
        out.push(pick);
    }
    out
}

/// Uniform random input word of `n` bits.
pub fn random_word(rng: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random::<bool>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn sample_distinct_is_distinct_and_in_range() {
        let mut rng = prng(3);
        for _ in 0..100 {
            let picks = sample_distinct(100, 30, &mut rng);
            let set: BTreeSet<u64> = picks.iter().copied().collect();
            assert_eq!(set.len(), 30);
            assert!(picks.iter().all(|&p| p < 100));
        }
    }

    #[test]
    fn sample_distinct_full_range_is_permutation() {
        let mut rng = prng(9);
        let picks = sample_distinct(16, 16, &mut rng);
        let set: BTreeSet<u64> = picks.iter().copied().collect();
        assert_eq!(set.len(), 16);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = sample_distinct(1 << 20, 50, &mut prng(5));
        let b = sample_distinct(1 << 20, 50, &mut prng(5));
        assert_eq!(a, b);
    }
}
