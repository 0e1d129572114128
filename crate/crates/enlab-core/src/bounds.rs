//! Closed-form privacy/accuracy trade-off bounds, and the comparison of
//! analytic lower bounds against audited measurements.
//!
//! * `lemma1_eps_lower` — any ε-DP, monotone, exchangeable recommender with
//!   accuracy 1−δ must have ε ≥ (1/t)·[ln((c−δ)/δ) + ln((n−k)/k)] for a
//!   (c, k) utility split and t edge edits elevating a low node to a high
//!   node's structure.
//! * `theorem4_eps_lower` — the degree-parameterized form
//!   (log n − log β − log log n)/(4·d_max).
//! * `reconstruction_error_bound` / `leaked_count` — the 4f reconstruction
//!   error bound and how many entries it certifiably leaks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base for the logarithms in the degree-parameterized bound. The nested
/// log log n uses the same base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[serde(rename = "e")]
    E,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "10")]
    Ten,
}

impl LogBase {
    pub fn log(&self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
            LogBase::Ten => x.log10(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            "10" => Ok(LogBase::Ten),
            other => Err(Error::InvalidParameter(format!(
                "log base must be one of e, 2, 10; got {other:?}"
            ))),
        }
    }
}

/// ε ≥ (1/t)·[ln((c−δ)/δ) + ln((n−k)/k)], natural log.
pub fn lemma1_eps_lower(t: u32, c: f64, delta: f64, n: u64, k: u64) -> Result<f64> {
    if t < 1 {
        return Err(Error::InvalidParameter("t must be an integer ≥ 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0 && c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < δ < 1 and 0 < c < 1, got δ = {delta}, c = {c}"
        )));
    }
    if delta >= c {
        return Err(Error::Domain(format!(
            "δ must be strictly below c (got δ = {delta}, c = {c})"
        )));
    }
    if k < 1 || k >= n {
        return Err(Error::Domain(format!("need 1 ≤ k < n, got k = {k}, n = {n}")));
    }
    let split_term = ((c - delta) / delta).ln();
    let count_term = ((n - k) as f64 / k as f64).ln();
    Ok((split_term + count_term) / t as f64)
}

/// ε ≥ (log n − log β − log log n)/(4·d_max) in the chosen base.
pub fn theorem4_eps_lower(n: u64, beta: u64, d_max: u64, base: LogBase) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be ≥ 2, got {n}")));
    }
    if beta < 1 || beta >= n {
        return Err(Error::InvalidParameter(format!(
            "need 1 ≤ β < n, got β = {beta}, n = {n}"
        )));
    }
    if d_max < 1 {
        return Err(Error::InvalidParameter("d_max must be ≥ 1".into()));
    }
    let log_n = base.log(n as f64);
    if log_n <= 1.0 {
        return Err(Error::Domain(format!(
            "log log n undefined or non-positive: n = {n} does not exceed the base {}",
            base.label()
        )));
    }
    Ok((log_n - base.log(beta as f64) - base.log(log_n)) / (4.0 * d_max as f64))
}

/// α in the d_max = α·log n parameterization, derived and read-only.
pub fn alpha(n: u64, d_max: u64, base: LogBase) -> Result<f64> {
    if n < 2 || d_max < 1 {
        return Err(Error::InvalidParameter(format!(
            "need n ≥ 2 and d_max ≥ 1, got n = {n}, d_max = {d_max}"
        )));
    }
    Ok(d_max as f64 / base.log(n as f64))
}

/// Worst-case reconstruction error against a within-f oracle: 4f.
pub fn reconstruction_error_bound(f: f64) -> Result<f64> {
    if !(f.is_finite() && f >= 0.0) {
        return Err(Error::InvalidParameter(format!("f must be finite and ≥ 0, got {f}")));
    }
    Ok(4.0 * f)
}

/// Entries guaranteed recovered: max(0, n − ⌈4f⌉).
pub fn leaked_count(n: u64, f: f64) -> Result<u64> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be ≥ 1".into()));
    }
    let bound = reconstruction_error_bound(f)?.ceil();
    if bound >= n as f64 {
        Ok(0)
    } else {
        Ok(n - bound as u64)
    }
}

/// A computed bound as a serializable record: which closed form, the named
/// inputs it was evaluated at, the value, and what the value bounds.
#[derive(Debug, Clone, Serialize)]
pub struct TradeoffBound {
    pub kind: &'static str,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub value: f64,
    pub interpretation: &'static str,
    pub flags: Vec<&'static str>,
}

impl TradeoffBound {
    pub fn lemma1(t: u32, c: f64, delta: f64, n: u64, k: u64) -> Result<Self> {
        let value = lemma1_eps_lower(t, c, delta, n, k)?;
        let mut inputs = BTreeMap::new();
        inputs.insert("t".into(), t.into());
        inputs.insert("c".into(), c.into());
        inputs.insert("delta".into(), delta.into());
        inputs.insert("n".into(), n.into());
        inputs.insert("k".into(), k.into());
        Ok(Self {
            kind: "lemma1",
            inputs,
            value,
            interpretation: "lower-bound-on-eps",
            flags: if value <= 0.0 { vec!["vacuous"] } else { vec![] },
        })
    }

    pub fn theorem4(n: u64, beta: u64, d_max: u64, base: LogBase) -> Result<Self> {
        let value = theorem4_eps_lower(n, beta, d_max, base)?;
        let mut inputs = BTreeMap::new();
        inputs.insert("n".into(), n.into());
        inputs.insert("beta".into(), beta.into());
        inputs.insert("d_max".into(), d_max.into());
        inputs.insert("log_base".into(), base.label().into());
        inputs.insert("alpha".into(), alpha(n, d_max, base)?.into());
        Ok(Self {
            kind: "theorem4",
            inputs,
            value,
            interpretation: "lower-bound-on-eps",
            flags: if value <= 0.0 { vec!["vacuous"] } else { vec![] },
        })
    }

    pub fn reconstruction(n: u64, f: f64) -> Result<Self> {
        let value = reconstruction_error_bound(f)?;
        let leaked = leaked_count(n, f)?;
        let mut inputs = BTreeMap::new();
        inputs.insert("n".into(), n.into());
        inputs.insert("f".into(), f.into());
        inputs.insert("leaked".into(), leaked.into());
        Ok(Self {
            kind: "reconstruction",
            inputs,
            value,
            interpretation: "upper-bound-on-error",
            flags: if value >= n as f64 { vec!["exceeds-database"] } else { vec![] },
        })
    }
}

/// One audited algorithm instance to compare against the analytic bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundMeasurement {
    pub label: String,
    /// Worst audited |ln p/p′| across the experiment's graph family.
    pub eps_measured: f64,
    /// dp-audit found a one-sided zero: not ε-DP for any ε.
    pub unbounded: bool,
    /// The recommender satisfied monotonicity on this instance.
    pub monotone: bool,
    /// Family-wide empirical accuracy; δ = 1 − accuracy.
    pub accuracy: f64,
    /// Edits elevating a lowest-utility node to a highest-utility node's
    /// structure; `None` when the utility is constant.
    pub t: Option<u32>,
    /// Candidate-node count used by the split term.
    pub n: u64,
    /// Candidate (c, k) splits from the grid, k = |V_hi| at that c.
    pub splits: Vec<(f64, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionReason {
    /// dp-audit flagged a one-sided zero.
    UnboundedRatio,
    /// Monotonicity (a bound hypothesis) failed.
    NotMonotone,
    /// Accuracy ≥ 1 leaves δ ≤ 0: the split term is undefined.
    DegenerateAccuracy,
    /// Constant utility: no low node to elevate.
    UndefinedEditDistance,
    /// No grid split satisfied 0 < δ < c < 1 and 1 ≤ k < n.
    NoValidSplit,
}

impl ExclusionReason {
    pub fn describe(&self) -> &'static str {
        match self {
            ExclusionReason::UnboundedRatio => "unbounded probability ratio (not ε-DP for any ε)",
            ExclusionReason::NotMonotone => "monotonicity hypothesis failed",
            ExclusionReason::DegenerateAccuracy => "accuracy ≥ 1 leaves δ ≤ 0",
            ExclusionReason::UndefinedEditDistance => "constant utility: t is undefined",
            ExclusionReason::NoValidSplit => "no valid (c, k) split in the grid",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum InstanceOutcome {
    Included {
        /// Largest (tightest) valid bound over the grid splits.
        bound: f64,
        c: f64,
        k: u64,
        /// eps_measured − bound; consistent when ≥ −tolerance.
        margin: f64,
        consistent: bool,
    },
    Excluded {
        reason: ExclusionReason,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub tolerance: f64,
    pub entries: Vec<(String, InstanceOutcome)>,
}

impl ConsistencyReport {
    pub fn included(&self) -> impl Iterator<Item = (&str, f64, bool)> + '_ {
        self.entries.iter().filter_map(|(label, o)| match o {
            InstanceOutcome::Included { margin, consistent, .. } => {
                Some((label.as_str(), *margin, *consistent))
            }
            InstanceOutcome::Excluded { .. } => None,
        })
    }

    pub fn all_consistent(&self) -> bool {
        self.included().all(|(_, _, ok)| ok)
    }
}

/// Compares each measurement against the tightest valid instantiation of the
/// ε lower bound; instances whose hypotheses fail are excluded with the
/// reason rather than silently dropped.
pub fn bound_vs_empirical(
    measurements: &[BoundMeasurement],
    tolerance: f64,
) -> ConsistencyReport {
    let entries = measurements
        .iter()
        .map(|m| (m.label.clone(), classify(m, tolerance)))
        .collect();
    ConsistencyReport { tolerance, entries }
}

fn classify(m: &BoundMeasurement, tolerance: f64) -> InstanceOutcome {
    use InstanceOutcome::Excluded;
    if m.unbounded {
        return Excluded { reason: ExclusionReason::UnboundedRatio };
    }
    if !m.monotone {
        return Excluded { reason: ExclusionReason::NotMonotone };
    }
    let delta = 1.0 - m.accuracy;
    if delta <= 0.0 {
        return Excluded { reason: ExclusionReason::DegenerateAccuracy };
    }
    let Some(t) = m.t else {
        return Excluded { reason: ExclusionReason::UndefinedEditDistance };
    };
    let mut best: Option<(f64, f64, u64)> = None;
    for &(c, k) in &m.splits {
        if delta >= c {
            continue;
        }
        let Ok(bound) = lemma1_eps_lower(t, c, delta, m.n, k) else {
            continue;
        };
        if best.is_none_or(|(b, _, _)| bound > b) {
            best = Some((bound, c, k));
        }
    }
    match best {
        Some((bound, c, k)) => {
            let margin = m.eps_measured - bound;
            InstanceOutcome::Included { bound, c, k, margin, consistent: margin >= -tolerance }
        }
        None => Excluded { reason: ExclusionReason::NoValidSplit },
    }
}
