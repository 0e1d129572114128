//! Zero-noise group-testing reconstruction.
//!
//! With exact counts, an interval whose answer is 0 is all zeros and one
//! whose answer equals its length is all ones; anything in between is
//! bisected. Each 1-entry is pinned down by at most ⌈log₂ n⌉ bisection
//! levels, so the whole database costs at most 1 + 2k⌈log₂ n⌉ queries for k
//! ones (and never more than 2n − 1).

use std::time::Instant;

use crate::db::{BinaryDatabase, SubsetQuery};
use crate::error::{Error, Result};
use crate::oracle::{NoiseMechanism, NoisyOracle};

use super::ReconstructionResult;

/// Exact reconstruction by adaptive bisection. Requires the exact mechanism;
/// the guarantee is void under any noise.
pub fn adaptive_split_reconstruct(
    oracle: &mut NoisyOracle,
    n: usize,
) -> Result<ReconstructionResult> {
    if oracle.mechanism() != NoiseMechanism::Exact {
        return Err(Error::Precondition(format!(
            "adaptive split needs exact answers, oracle uses {}",
            oracle.mechanism().name()
        )));
    }
    if n == 0 || n > oracle.n() {
        return Err(Error::InvalidParameter(format!(
            "length {n} invalid for oracle of length {}",
            oracle.n()
        )));
    }

    let start = Instant::now();
    let before = oracle.query_count();
    let mut bits = vec![false; n];

    let root = exact_count(oracle, 0, n)?;
    resolve(oracle, 0, n, root, &mut bits)?;

    Ok(ReconstructionResult::new(
        "adaptive-split",
        BinaryDatabase::from_bits(bits)?,
        oracle.query_count() - before,
        start.elapsed(),
    ))
}

fn exact_count(oracle: &mut NoisyOracle, start: usize, len: usize) -> Result<u64> {
    let a = oracle.answer(&SubsetQuery::from_range(start..start + len))?;
    Ok(a.round() as u64)
}

/// Fills `bits[start..start+len]` given the interval's exact count.
fn resolve(
    oracle: &mut NoisyOracle,
    start: usize,
    len: usize,
    count: u64,
    bits: &mut [bool],
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    if count == len as u64 {
        bits[start..start + len].fill(true);
        return Ok(());
    }
    // mixed interval: bisect at ⌊len/2⌋ and query both halves
    let half = len / 2;
    let left = exact_count(oracle, start, half)?;
    let right = exact_count(oracle, start + half, len - half)?;
    debug_assert_eq!(left + right, count);
    resolve(oracle, start, half, left, bits)?;
    resolve(oracle, start + half, len - half, right, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::db::random_database;
    use crate::seed::derive_seed;

    fn oracle_for(truth: &BinaryDatabase) -> NoisyOracle {
        NoisyOracle::new(truth.clone(), NoiseMechanism::Exact, 0).unwrap()
    }

    #[test]
    fn single_one_at_index_seven_costs_nine_queries() {
        // Hand simulation: full set, then a bisection chain of depth 4 with
        // two child queries per level → 1 + 2·4 = 9.
        let mut bits = vec![false; 16];
        bits[7] = true;
        let truth = BinaryDatabase::from_bits(bits).unwrap();
        let mut oracle = oracle_for(&truth);
        let result = adaptive_split_reconstruct(&mut oracle, 16).unwrap();
        assert_eq!(result.candidate, truth);
        assert_eq!(result.queries_used, 9);
    }

    #[test]
    fn all_zeros_costs_one_query() {
        let truth = BinaryDatabase::from_bits(vec![false; 16]).unwrap();
        let mut oracle = oracle_for(&truth);
        let result = adaptive_split_reconstruct(&mut oracle, 16).unwrap();
        assert_eq!(result.candidate, truth);
        assert_eq!(result.queries_used, 1);
    }

    #[test]
    fn all_ones_costs_one_query() {
        let truth = BinaryDatabase::from_bits(vec![true; 9]).unwrap();
        let mut oracle = oracle_for(&truth);
        let result = adaptive_split_reconstruct(&mut oracle, 9).unwrap();
        assert_eq!(result.candidate, truth);
        assert_eq!(result.queries_used, 1);
    }

    #[test]
    fn sparse_recovery_stays_under_log_bound() {
        let n = 1024u64;
        let log2n = 10u64;
        for trial in 0..100 {
            let seed = derive_seed(404, trial);
            let truth = sparse_db(1024, 3, seed);
            let k = truth.ones() as u64;
            let mut oracle = oracle_for(&truth);
            let result = adaptive_split_reconstruct(&mut oracle, 1024).unwrap();
            assert_eq!(result.candidate, truth);
            assert!(result.queries_used <= 1 + 2 * k * log2n);
            assert!(result.queries_used < 2 * n);
        }
    }

    #[test]
    fn exactness_on_non_power_of_two_lengths() {
        for trial in 0..50 {
            let truth = random_database(37, 0.3, derive_seed(55, trial)).unwrap();
            let mut oracle = oracle_for(&truth);
            let result = adaptive_split_reconstruct(&mut oracle, 37).unwrap();
            assert_eq!(result.candidate, truth);
            assert!(result.queries_used < 2 * 37);
        }
    }

    #[test]
    fn noisy_mechanism_is_rejected() {
        let truth = random_database(8, 0.5, 1).unwrap();
        let mut oracle =
            NoisyOracle::new(truth, NoiseMechanism::BoundedUniform { f: 1.0 }, 2).unwrap();
        let err = adaptive_split_reconstruct(&mut oracle, 8).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert_eq!(oracle.query_count(), 0);
    }

    fn sparse_db(n: usize, max_ones: usize, seed: u64) -> BinaryDatabase {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut bits = vec![false; n];
        let k = rng.gen_range(0..=max_ones);
        for _ in 0..k {
            bits[rng.gen_range(0..n)] = true;
        }
        BinaryDatabase::from_bits(bits).unwrap()
    }
}
