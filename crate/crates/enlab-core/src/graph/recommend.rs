//! Probabilistic recommenders and their accuracy.
//!
//! A recommender maps a utility vector to a probability distribution over
//! the non-target nodes. The exponential mechanism is the standard
//! differentially private choice: p_i ∝ exp(ε·u_i / (2Δ)), strictly monotone
//! in utility and never zero anywhere.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::UtilityVector;

/// Tolerance on Σp_i = 1.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Probability of recommending each non-target node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationDistribution {
    target: usize,
    probs: BTreeMap<usize, f64>,
}

impl RecommendationDistribution {
    pub fn new(target: usize, probs: BTreeMap<usize, f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("distribution over no nodes".into()));
        }
        if let Some((&node, &p)) = probs.iter().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "probability of node {node} must be finite and ≥ 0, got {p}"
            )));
        }
        let sum: f64 = probs.values().sum();
        if (sum - 1.0).abs() >= NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum}, expected 1 ± {NORMALIZATION_TOL}"
            )));
        }
        Ok(Self { target, probs })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn get(&self, node: usize) -> Option<f64> {
        self.probs.get(&node).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.keys().copied()
    }

    fn same_support(&self, utility: &UtilityVector) -> Result<()> {
        if self.target == utility.target()
            && self.len() == utility.len()
            && self.nodes().eq(utility.nodes())
        {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                "utility vector and distribution cover different node sets".into(),
            ))
        }
    }
}

/// The recommenders the experiments exercise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RecommenderKind {
    /// p_i ∝ exp(eps_param·u_i / (2·sensitivity)).
    Exponential { eps_param: f64, sensitivity: f64 },
    /// Probability 1 on a maximum-utility node (lowest index on ties).
    /// Deterministic, therefore not differentially private.
    RBest,
    /// Ignores utilities entirely.
    Uniform,
}

impl RecommenderKind {
    pub fn name(&self) -> &'static str {
        match self {
            RecommenderKind::Exponential { .. } => "exponential",
            RecommenderKind::RBest => "r-best",
            RecommenderKind::Uniform => "uniform",
        }
    }

    pub fn recommend(&self, utility: &UtilityVector) -> Result<RecommendationDistribution> {
        match *self {
            RecommenderKind::Exponential { eps_param, sensitivity } => {
                exponential_mechanism(utility, eps_param, sensitivity)
            }
            RecommenderKind::RBest => {
                let best = utility
                    .iter()
                    .fold(None::<(usize, f64)>, |acc, (node, u)| match acc {
                        Some((_, bu)) if bu >= u => acc,
                        _ => Some((node, u)),
                    })
                    .expect("utility vector is non-empty")
                    .0;
                let probs = utility
                    .nodes()
                    .map(|node| (node, if node == best { 1.0 } else { 0.0 }))
                    .collect();
                RecommendationDistribution::new(utility.target(), probs)
            }
            RecommenderKind::Uniform => {
                let p = 1.0 / utility.len() as f64;
                let probs = utility.nodes().map(|node| (node, p)).collect();
                RecommendationDistribution::new(utility.target(), probs)
            }
        }
    }
}

/// The exponential mechanism: p_i ∝ exp(eps_param·u_i / (2·sensitivity)),
/// computed with max-subtraction so large exponents cannot overflow.
pub fn exponential_mechanism(
    utility: &UtilityVector,
    eps_param: f64,
    sensitivity: f64,
) -> Result<RecommendationDistribution> {
    if !(eps_param.is_finite() && eps_param > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps_param must be finite and > 0, got {eps_param}"
        )));
    }
    if !(sensitivity.is_finite() && sensitivity > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sensitivity must be finite and > 0, got {sensitivity}"
        )));
    }
    let scale = eps_param / (2.0 * sensitivity);
    let max_exp = utility.iter().map(|(_, u)| u * scale).fold(f64::MIN, f64::max);
    let weights: Vec<(usize, f64)> = utility
        .iter()
        .map(|(node, u)| (node, (u * scale - max_exp).exp()))
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    let probs = weights.into_iter().map(|(node, w)| (node, w / total)).collect();
    RecommendationDistribution::new(utility.target(), probs)
}

/// Σ_i u_i·p_i.
pub fn expected_utility(
    utility: &UtilityVector,
    distribution: &RecommendationDistribution,
) -> Result<f64> {
    distribution.same_support(utility)?;
    Ok(utility
        .iter()
        .map(|(node, u)| u * distribution.get(node).expect("same support"))
        .sum())
}

/// Witness of a monotonicity violation: u_i > u_j but p_i ≤ p_j.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotonicityWitness {
    pub node_high: usize,
    pub node_low: usize,
    pub u_high: f64,
    pub u_low: f64,
    pub p_high: f64,
    pub p_low: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum MonotonicityOutcome {
    Pass,
    Fail { witness: MonotonicityWitness },
}

impl MonotonicityOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, MonotonicityOutcome::Pass)
    }
}

/// Checks u_i > u_j ⇒ p_i > p_j over all node pairs.
pub fn monotonicity_check(
    utility: &UtilityVector,
    distribution: &RecommendationDistribution,
) -> Result<MonotonicityOutcome> {
    distribution.same_support(utility)?;
    let entries: Vec<(usize, f64, f64)> = utility
        .iter()
        .map(|(node, u)| (node, u, distribution.get(node).expect("same support")))
        .collect();
    for &(i, ui, pi) in &entries {
        for &(j, uj, pj) in &entries {
            if ui > uj && pi <= pj {
                return Ok(MonotonicityOutcome::Fail {
                    witness: MonotonicityWitness {
                        node_high: i,
                        node_low: j,
                        u_high: ui,
                        u_low: uj,
                        p_high: pi,
                        p_low: pj,
                    },
                });
            }
        }
    }
    Ok(MonotonicityOutcome::Pass)
}

/// Worst-case ratio of expected utility to maximum utility over an explicit
/// utility family: min_u Σu_i·p_i / u_max.
pub fn empirical_accuracy<R>(recommend: R, family: &[UtilityVector]) -> Result<f64>
where
    R: Fn(&UtilityVector) -> Result<RecommendationDistribution>,
{
    if family.is_empty() {
        return Err(Error::InvalidParameter("utility family is empty".into()));
    }
    let mut worst = f64::INFINITY;
    for utility in family {
        if utility.is_all_zero() {
            return Err(Error::UndefinedRatio);
        }
        let distribution = recommend(utility)?;
        let ratio = expected_utility(utility, &distribution)? / utility.u_max();
        worst = worst.min(ratio);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(values: &[f64]) -> UtilityVector {
        UtilityVector::from_dense(0, values).unwrap()
    }

    #[test]
    fn expected_utility_examples() {
        let u = dense(&[1.0, 2.0, 3.0]);
        let p = RecommendationDistribution::new(
            0,
            [(1, 0.2), (2, 0.3), (3, 0.5)].into_iter().collect(),
        )
        .unwrap();
        assert!((expected_utility(&u, &p).unwrap() - 2.3).abs() < 1e-12);

        // indicator of node j yields u_j
        let indicator = RecommenderKind::RBest.recommend(&u).unwrap();
        assert_eq!(expected_utility(&u, &indicator).unwrap(), 3.0);

        // uniform yields the mean
        let uniform = RecommenderKind::Uniform.recommend(&u).unwrap();
        assert!((expected_utility(&u, &uniform).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_mechanism_constant_utility_is_uniform() {
        let p = exponential_mechanism(&dense(&[2.0; 5]), 1.0, 1.0).unwrap();
        for (_, prob) in p.iter() {
            assert!((prob - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn exponential_mechanism_small_eps_limit_is_uniform() {
        let p = exponential_mechanism(&dense(&[5.0, 1.0, 0.0, 3.0]), 1e-8, 1.0).unwrap();
        for (_, prob) in p.iter() {
            assert!((prob - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn exponential_mechanism_two_point_closed_form() {
        // u=(1,0), eps=2, Δ=1 → exponents (1, 0) → p = (e, 1)/(e+1)
        let p = exponential_mechanism(&dense(&[1.0, 0.0]), 2.0, 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((p.get(1).unwrap() - e / (e + 1.0)).abs() < 1e-12);
        assert!((p.get(2).unwrap() - 1.0 / (e + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn exponential_mechanism_survives_huge_utilities() {
        let p = exponential_mechanism(&dense(&[1e6, 0.0]), 10.0, 1.0).unwrap();
        assert!(p.get(1).unwrap() > 0.999);
        let sum: f64 = p.iter().map(|(_, v)| v).sum();
        assert!((sum - 1.0).abs() < NORMALIZATION_TOL);
    }

    #[test]
    fn exponential_mechanism_rejects_bad_params() {
        let u = dense(&[1.0]);
        assert!(exponential_mechanism(&u, 0.0, 1.0).is_err());
        assert!(exponential_mechanism(&u, 1.0, 0.0).is_err());
        assert!(exponential_mechanism(&u, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn monotonicity_outcomes() {
        let u = dense(&[3.0, 2.0, 1.0]);
        let expo = exponential_mechanism(&u, 1.0, 1.0).unwrap();
        assert!(monotonicity_check(&u, &expo).unwrap().passed());

        let uniform = RecommenderKind::Uniform.recommend(&u).unwrap();
        assert!(!monotonicity_check(&u, &uniform).unwrap().passed());

        // argmax indicator: the two lower utilities share p = 0
        let best = RecommenderKind::RBest.recommend(&u).unwrap();
        match monotonicity_check(&u, &best).unwrap() {
            MonotonicityOutcome::Fail { witness } => {
                assert!(witness.u_high > witness.u_low);
                assert_eq!(witness.p_high, 0.0);
                assert_eq!(witness.p_low, 0.0);
            }
            MonotonicityOutcome::Pass => panic!("expected a violation"),
        }
    }

    #[test]
    fn r_best_breaks_ties_to_lowest_index() {
        let u = dense(&[2.0, 5.0, 5.0]);
        let p = RecommenderKind::RBest.recommend(&u).unwrap();
        assert_eq!(p.get(2), Some(1.0));
        assert_eq!(p.get(3), Some(0.0));
    }

    #[test]
    fn accuracy_of_r_best_is_one() {
        let family = vec![dense(&[1.0, 0.0, 0.0, 0.0]), dense(&[2.0, 5.0, 1.0, 4.0])];
        let acc = empirical_accuracy(|u| RecommenderKind::RBest.recommend(u), &family).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn accuracy_of_uniform_on_single_spike() {
        let family = vec![dense(&[1.0, 0.0, 0.0, 0.0])];
        let acc = empirical_accuracy(|u| RecommenderKind::Uniform.recommend(u), &family).unwrap();
        assert!((acc - 0.25).abs() < 1e-12);
    }

    #[test]
    fn accuracy_of_exponential_on_single_spike() {
        // independent oracle: normalize the weights by hand.
        // exponents ε·u/(2Δ) = u/2 → weights (e^0.5, 1, 1, 1)
        let family = vec![dense(&[1.0, 0.0, 0.0, 0.0])];
        let acc = empirical_accuracy(
            |u| exponential_mechanism(u, 1.0, 1.0),
            &family,
        )
        .unwrap();
        let w = 0.5f64.exp();
        let expected = w / (w + 3.0);
        assert!((acc - expected).abs() < 1e-12, "{acc} vs {expected}");
    }

    #[test]
    fn accuracy_rejects_all_zero_family_member() {
        let family = vec![dense(&[0.0, 0.0])];
        let err = empirical_accuracy(|u| RecommenderKind::Uniform.recommend(u), &family)
            .unwrap_err();
        assert!(matches!(err, Error::UndefinedRatio));
    }

    #[test]
    fn scaling_utilities_keeps_the_argmax() {
        let u = dense(&[0.5, 3.0, 1.0, 2.0]);
        let scaled = dense(&[0.5 * 7.0, 3.0 * 7.0, 1.0 * 7.0, 2.0 * 7.0]);
        let argmax = |p: &RecommendationDistribution| {
            p.iter()
                .fold(None::<(usize, f64)>, |acc, (n, v)| match acc {
                    Some((_, bv)) if bv >= v => acc,
                    _ => Some((n, v)),
                })
                .unwrap()
                .0
        };
        let p1 = exponential_mechanism(&u, 1.3, 1.0).unwrap();
        let p2 = exponential_mechanism(&scaled, 1.3, 1.0).unwrap();
        assert_eq!(argmax(&p1), argmax(&p2));
    }

    #[test]
    fn distribution_rejects_unnormalized_probs() {
        let probs: BTreeMap<usize, f64> = [(1, 0.5), (2, 0.6)].into_iter().collect();
        assert!(RecommendationDistribution::new(0, probs).is_err());
    }

    #[test]
    fn support_mismatch_is_detected() {
        let u = dense(&[1.0, 2.0]);
        let p = RecommendationDistribution::new(0, [(1, 1.0)].into_iter().collect()).unwrap();
        assert!(matches!(
            expected_utility(&u, &p).unwrap_err(),
            Error::DimensionMismatch(_)
        ));
    }
}
