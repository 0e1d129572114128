//! Binary infection-status databases and subset queries.
//!
//! A database is an ordered sequence of 0/1 statuses, one per user. A subset
//! query names a set of positions and its true answer is the number of 1s at
//! those positions.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Ordered sequence of binary infection statuses, length ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryDatabase {
    bits: Vec<bool>,
}

impl BinaryDatabase {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter(
                "database must contain at least one entry".into(),
            ));
        }
        Ok(Self { bits })
    }

    /// Builds a database from 0/1 integer entries.
    pub fn from_entries(entries: &[u8]) -> Result<Self> {
        let bits = entries
            .iter()
            .map(|&e| match e {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "database entry must be 0 or 1, got {other}"
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Self::from_bits(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length ≥ 1 by construction
    }

    pub fn bit(&self, index: usize) -> Option<bool> {
        self.bits.get(index).copied()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of 1-entries in the whole database.
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True answer to a subset query: the count of 1s at the queried
    /// positions (Σ_{i∈q} d_i).
    pub fn true_answer(&self, query: &SubsetQuery) -> Result<u64> {
        let mut count = 0u64;
        for i in query.indices() {
            match self.bits.get(i) {
                Some(true) => count += 1,
                Some(false) => {}
                None => {
                    return Err(Error::InvalidQuery(format!(
                        "index {i} out of range for database of length {}",
                        self.len()
                    )))
                }
            }
        }
        Ok(count)
    }

    /// Number of positions at which two equal-length databases differ.
    pub fn hamming_distance(&self, other: &BinaryDatabase) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "hamming distance needs equal lengths, got {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }
}

impl fmt::Display for BinaryDatabase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinaryDatabase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "database string may only contain '0'/'1', got {other:?}"
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Self::from_bits(bits)
    }
}

impl Serialize for BinaryDatabase {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BinaryDatabase {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// A set of distinct positions to count 1s over. The empty query is allowed
/// (true answer 0).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubsetQuery {
    indices: BTreeSet<usize>,
}

impl SubsetQuery {
    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        Self {
            indices: indices.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Query over a contiguous index interval `[start, end)`.
    pub fn from_range(range: std::ops::Range<usize>) -> Self {
        Self::new(range)
    }

    /// Query from a bitmask: bit `i` of `mask` selects index `offset + i`.
    pub fn from_mask(mask: u64, offset: usize) -> Self {
        let mut indices = BTreeSet::new();
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            indices.insert(offset + i);
            m &= m - 1;
        }
        Self { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    /// Checks every index against a database length.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        if let Some(&max) = self.indices.last() {
            if max >= n {
                return Err(Error::InvalidQuery(format!(
                    "index {max} out of range for database of length {n}"
                )));
            }
        }
        Ok(())
    }
}

/// Samples a database of length `n` whose entries are independently 1 with
/// probability `prevalence`.
pub fn random_database(n: usize, prevalence: f64, seed: u64) -> Result<BinaryDatabase> {
    if n == 0 {
        return Err(Error::InvalidParameter("database length must be ≥ 1".into()));
    }
    if !(0.0..=1.0).contains(&prevalence) {
        return Err(Error::InvalidParameter(format!(
            "prevalence must lie in [0, 1], got {prevalence}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = (0..n).map(|_| rng.gen_bool(prevalence)).collect();
    BinaryDatabase::from_bits(bits)
}
