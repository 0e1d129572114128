//! Oracle contract properties: perturbation bounds, reproducibility, query
//! accounting, and additivity of true answers.

use proptest::prelude::*;

use enlab_core::db::{random_database, BinaryDatabase, SubsetQuery};
use enlab_core::oracle::{NoiseMechanism, NoisyOracle};
use enlab_core::seed::derive_seed;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 10^4 random (database, query) pairs per bounded mechanism: zero
/// perturbation-contract violations.
#[test]
fn bounded_mechanisms_never_violate_within_f() {
    let cases: [(NoiseMechanism, f64); 3] = [
        (NoiseMechanism::Exact, 0.5),
        (NoiseMechanism::BoundedUniform { f: 3.0 }, 3.0),
        (NoiseMechanism::Rounding { m: 4.0 }, 2.5), // |err| ≤ 2 < 2.5
    ];
    for (mech, f) in cases {
        assert!(mech.satisfies_within(f));
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
        let mut violations = 0u32;
        for trial in 0..100 {
            let n = rng.gen_range(1..=64);
            let db = random_database(n, rng.gen_range(0.0..=1.0), derive_seed(1, trial)).unwrap();
            let mut oracle = NoisyOracle::new(db.clone(), mech, derive_seed(2, trial)).unwrap();
            for _ in 0..100 {
                let q = SubsetQuery::new((0..n).filter(|_| rng.gen_bool(0.5)));
                let truth = db.true_answer(&q).unwrap() as f64;
                let a = oracle.answer(&q).unwrap();
                if (a - truth).abs() >= f {
                    violations += 1;
                }
            }
        }
        assert_eq!(violations, 0, "{} broke |answer − true| < {f}", mech.name());
    }
}

#[test]
fn query_count_tracks_answered_queries_exactly() {
    let db = random_database(20, 0.5, 3).unwrap();
    let mut oracle =
        NoisyOracle::new(db, NoiseMechanism::BoundedUniform { f: 1.0 }, 4).unwrap();
    for k in 1..=250u64 {
        oracle.answer(&SubsetQuery::from_range(0..10)).unwrap();
        assert_eq!(oracle.query_count(), k);
    }
}

#[test]
fn replaying_a_seed_replays_the_answers() {
    let db = random_database(30, 0.4, 9).unwrap();
    let queries: Vec<SubsetQuery> = (0..200)
        .map(|i| SubsetQuery::new((0..30).filter(|j| (i * 31 + j * 7) % 3 == 0)))
        .collect();
    for mech in [
        NoiseMechanism::Exact,
        NoiseMechanism::BoundedUniform { f: 2.0 },
        NoiseMechanism::Rounding { m: 3.0 },
        NoiseMechanism::Laplace { b: 0.7 },
    ] {
        let run = |seed: u64| -> Vec<u64> {
            let mut o = NoisyOracle::new(db.clone(), mech, seed).unwrap();
            queries.iter().map(|q| o.answer(q).unwrap().to_bits()).collect()
        };
        assert_eq!(run(123), run(123), "{} replay differed", mech.name());
    }
}

proptest! {
    /// true_answer(q1 ∪ q2) = true_answer(q1) + true_answer(q2) on disjoint
    /// queries.
    #[test]
    fn true_answer_is_additive_on_disjoint_queries(
        bits in prop::collection::vec(any::<bool>(), 1..80),
        picks in prop::collection::vec(0u8..3, 1..80),
    ) {
        let n = bits.len();
        let db = BinaryDatabase::from_bits(bits).unwrap();
        // assign each index to q1, q2, or neither
        let q1 = SubsetQuery::new((0..n).filter(|&i| picks.get(i).copied().unwrap_or(2) == 0));
        let q2 = SubsetQuery::new((0..n).filter(|&i| picks.get(i).copied().unwrap_or(2) == 1));
        let union = SubsetQuery::new(q1.indices().chain(q2.indices()));
        prop_assert_eq!(
            db.true_answer(&union).unwrap(),
            db.true_answer(&q1).unwrap() + db.true_answer(&q2).unwrap()
        );
    }

    /// Hamming distance is symmetric and zero exactly on equality.
    #[test]
    fn hamming_symmetry(
        a in prop::collection::vec(any::<bool>(), 1..64),
        flips in prop::collection::vec(any::<bool>(), 1..64),
    ) {
        let n = a.len().min(flips.len());
        let a_bits: Vec<bool> = a[..n].to_vec();
        let b_bits: Vec<bool> =
            a_bits.iter().zip(&flips[..n]).map(|(&x, &f)| x ^ f).collect();
        let da = BinaryDatabase::from_bits(a_bits.clone()).unwrap();
        let db_ = BinaryDatabase::from_bits(b_bits.clone()).unwrap();
        let d1 = da.hamming_distance(&db_).unwrap();
        let d2 = db_.hamming_distance(&da).unwrap();
        prop_assert_eq!(d1, d2);
        prop_assert_eq!(d1 == 0, a_bits == b_bits);
    }
}
