//! Noisy query-answering mechanisms over binary databases.
//!
//! An oracle owns a database, a noise mechanism, and a seeded RNG stream.
//! The `exact`, `bounded-uniform`, and `rounding` mechanisms answer every
//! query within a strict perturbation bound; `laplace` has unbounded support
//! and deliberately satisfies no such bound (it exists for differential
//! privacy experiments).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::db::{BinaryDatabase, SubsetQuery};
use crate::error::{Error, Result};

/// How query answers are perturbed.
///
/// * `exact` — the true count, unmodified.
/// * `bounded-uniform` — true count plus uniform noise from the open
///   interval (−f, f), so |answer − true| < f strictly on every query.
/// * `rounding` — the nearest multiple of `m` (ties toward even multiples),
///   so |answer − true| ≤ m/2, within any bound f > m/2.
/// * `laplace` — additive Laplace(b) noise; unbounded support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseMechanism {
    Exact,
    BoundedUniform { f: f64 },
    Rounding { m: f64 },
    Laplace { b: f64 },
}

impl NoiseMechanism {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseMechanism::Exact => Ok(()),
            NoiseMechanism::BoundedUniform { f } if f.is_finite() && f > 0.0 => Ok(()),
            NoiseMechanism::BoundedUniform { f } => Err(Error::InvalidParameter(format!(
                "bounded-uniform needs finite f > 0, got {f}"
            ))),
            NoiseMechanism::Rounding { m } if m.is_finite() && m > 0.0 => Ok(()),
            NoiseMechanism::Rounding { m } => Err(Error::InvalidParameter(format!(
                "rounding needs finite granularity m > 0, got {m}"
            ))),
            NoiseMechanism::Laplace { b } if b.is_finite() && b > 0.0 => Ok(()),
            NoiseMechanism::Laplace { b } => Err(Error::InvalidParameter(format!(
                "laplace needs finite scale b > 0, got {b}"
            ))),
        }
    }

    /// Whether every answer is guaranteed to differ from the true answer by
    /// strictly less than `f`.
    pub fn satisfies_within(&self, f: f64) -> bool {
        match *self {
            NoiseMechanism::Exact => f > 0.0,
            NoiseMechanism::BoundedUniform { f: fb } => f >= fb,
            NoiseMechanism::Rounding { m } => f > m / 2.0,
            NoiseMechanism::Laplace { .. } => false,
        }
    }

    /// True for mechanisms that satisfy some finite perturbation bound.
    pub fn is_bounded(&self) -> bool {
        !matches!(self, NoiseMechanism::Laplace { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseMechanism::Exact => "exact",
            NoiseMechanism::BoundedUniform { .. } => "bounded-uniform",
            NoiseMechanism::Rounding { .. } => "rounding",
            NoiseMechanism::Laplace { .. } => "laplace",
        }
    }
}

/// Wire form of an oracle configuration:
/// `{"kind": ..., "f": ..., "m": ..., "b": ..., "seed": ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    #[serde(flatten)]
    pub mechanism: NoiseMechanism,
    pub seed: u64,
}

impl OracleSpec {
    pub fn into_oracle(self, database: BinaryDatabase) -> Result<NoisyOracle> {
        NoisyOracle::new(database, self.mechanism, self.seed)
    }
}

/// A stateful query-answering oracle. One logical owner issues queries
/// sequentially; replaying the same (database, mechanism, seed, query
/// sequence) yields bit-identical answers.
#[derive(Debug, Clone)]
pub struct NoisyOracle {
    database: BinaryDatabase,
    mechanism: NoiseMechanism,
    seed: u64,
    rng: ChaCha8Rng,
    query_count: u64,
    query_budget: Option<u64>,
}

impl NoisyOracle {
    pub fn new(database: BinaryDatabase, mechanism: NoiseMechanism, seed: u64) -> Result<Self> {
        mechanism.validate()?;
        Ok(Self {
            database,
            mechanism,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            query_count: 0,
            query_budget: None,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.query_budget = Some(budget);
        self
    }

    pub fn n(&self) -> usize {
        self.database.len()
    }

    pub fn mechanism(&self) -> NoiseMechanism {
        self.mechanism
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn query_budget(&self) -> Option<u64> {
        self.query_budget
    }

    /// Ground truth held by the experiment harness. Attacks must not call
    /// this; they see only `answer`.
    pub fn database(&self) -> &BinaryDatabase {
        &self.database
    }

    /// Answers one subset query, consuming one unit of budget.
    pub fn answer(&mut self, query: &SubsetQuery) -> Result<f64> {
        if let Some(budget) = self.query_budget {
            if self.query_count >= budget {
                return Err(Error::BudgetExhausted {
                    budget,
                    answered: self.query_count,
                });
            }
        }
        let truth = self.database.true_answer(query)? as f64;
        let answer = match self.mechanism {
            NoiseMechanism::Exact => truth,
            NoiseMechanism::BoundedUniform { f } => truth + self.open_uniform(f),
            NoiseMechanism::Rounding { m } => (truth / m).round_ties_even() * m,
            NoiseMechanism::Laplace { b } => truth + self.laplace(b),
        };
        self.query_count += 1;
        Ok(answer)
    }

    /// Uniform draw from the open interval (−f, f). `gen_range` samples the
    /// half-open [−f, f); the single excluded endpoint is resampled to keep
    /// the strict bound exact.
    fn open_uniform(&mut self, f: f64) -> f64 {
        loop {
            let x = self.rng.gen_range(-f..f);
            if x != -f {
                return x;
            }
        }
    }

    /// Inverse-CDF Laplace sample with scale `b`.
    fn laplace(&mut self, b: f64) -> f64 {
        loop {
            let u: f64 = self.rng.gen_range(-0.5..0.5);
            let x = -b * u.signum() * (1.0 - 2.0 * u.abs()).ln();
            if x.is_finite() {
                return x;
            }
        }
    }
}
