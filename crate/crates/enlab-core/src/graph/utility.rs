//! Structural utility of alerting the target about each non-target node.
//!
//! Utilities must be functions of the graph structure alone (relative to the
//! target): any relabeling of non-target nodes must relabel the utilities
//! with it. Both built-in kinds have this property by construction; the
//! exhaustive permutation check exists to catch kinds that do not.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ContactGraph;

/// Built-in structural utility functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityKind {
    /// u_i = 1 if (target, i) is an edge, else 0.
    DirectEdge,
    /// u_i = |N(target) ∩ N(i)|.
    CommonNeighbors,
}

impl UtilityKind {
    /// Largest change in any single u_i when one edge flips; the exponential
    /// mechanism needs this to honor its privacy parameter.
    pub fn edge_sensitivity(&self) -> f64 {
        match self {
            // flipping (r,x) moves u_x by 1; other flips leave u alone
            UtilityKind::DirectEdge => 1.0,
            // a flip changes any single neighborhood by one element
            UtilityKind::CommonNeighbors => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UtilityKind::DirectEdge => "direct-edge",
            UtilityKind::CommonNeighbors => "common-neighbors",
        }
    }
}

impl std::str::FromStr for UtilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct-edge" => Ok(UtilityKind::DirectEdge),
            "common-neighbors" => Ok(UtilityKind::CommonNeighbors),
            other => Err(Error::InvalidParameter(format!("unknown utility kind {other:?}"))),
        }
    }
}

/// Non-negative utility per non-target node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityVector {
    target: usize,
    values: BTreeMap<usize, f64>,
}

impl UtilityVector {
    pub fn new(target: usize, values: BTreeMap<usize, f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("utility vector over no nodes".into()));
        }
        if values.contains_key(&target) {
            return Err(Error::InvalidParameter(
                "utility vector must not cover the target node".into(),
            ));
        }
        if let Some((&node, &v)) = values.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "utility of node {node} must be finite and ≥ 0, got {v}"
            )));
        }
        Ok(Self { target, values })
    }

    /// Convenience constructor: values in node-index order over `0..=len`,
    /// skipping the target.
    pub fn from_dense(target: usize, values: &[f64]) -> Result<Self> {
        let map = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (if i < target { i } else { i + 1 }, v))
            .collect();
        Self::new(target, map)
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn get(&self, node: usize) -> Option<f64> {
        self.values.get(&node).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn u_max(&self) -> f64 {
        self.values.values().copied().fold(f64::MIN, f64::max)
    }

    pub fn u_min(&self) -> f64 {
        self.values.values().copied().fold(f64::MAX, f64::min)
    }

    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.values().all(|&v| v == 0.0)
    }

    /// (argmin nodes, argmax nodes) in index order.
    pub fn argmin_argmax(&self) -> (Vec<usize>, Vec<usize>) {
        let lo = self.u_min();
        let hi = self.u_max();
        let lows = self.iter().filter(|&(_, v)| v == lo).map(|(n, _)| n).collect();
        let highs = self.iter().filter(|&(_, v)| v == hi).map(|(n, _)| n).collect();
        (lows, highs)
    }
}

/// Computes the chosen structural utility for every non-target node.
pub fn structural_utility(graph: &ContactGraph, kind: UtilityKind) -> Result<UtilityVector> {
    let r = graph.target();
    let values = graph
        .candidates()
        .map(|i| {
            let u = match kind {
                UtilityKind::DirectEdge => {
                    if graph.has_edge(r, i) {
                        1.0
                    } else {
                        0.0
                    }
                }
                UtilityKind::CommonNeighbors => {
                    graph.neighbors(r).intersection(graph.neighbors(i)).count() as f64
                }
            };
            (i, u)
        })
        .collect();
    UtilityVector::new(r, values)
}

/// Witness of an exchangeability violation: the permutation of non-target
/// nodes and the node whose utility moved.
#[derive(Debug, Clone, Serialize)]
pub struct ExchangeabilityWitness {
    pub permutation: Vec<usize>,
    pub node: usize,
    pub utility_original: f64,
    pub utility_relabeled: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum ExchangeabilityOutcome {
    Pass { permutations_checked: usize },
    Fail { witness: ExchangeabilityWitness },
}

impl ExchangeabilityOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ExchangeabilityOutcome::Pass { .. })
    }
}

/// Cap on exhaustive permutation enumeration: 8! relabelings.
pub const EXCHANGEABILITY_CAP: usize = 9;

/// Exhaustively checks that a utility function commutes with every
/// target-fixing relabeling of the graph: u_i(G) must equal u_{h(i)}(h(G)).
pub fn exchangeability_check<F>(graph: &ContactGraph, utility: F) -> Result<ExchangeabilityOutcome>
where
    F: Fn(&ContactGraph) -> Result<UtilityVector>,
{
    let n = graph.n();
    if n > EXCHANGEABILITY_CAP {
        return Err(Error::Scale(format!(
            "exchangeability check enumerates (n−1)! relabelings; n = {n} exceeds the cap of {EXCHANGEABILITY_CAP}"
        )));
    }
    let base = utility(graph)?;
    let others: Vec<usize> = graph.candidates().collect();
    let mut checked = 0;
    for image in others.iter().copied().permutations(others.len()) {
        // perm[v] = new id of node v; target stays fixed
        let mut perm = vec![0usize; n];
        perm[graph.target()] = graph.target();
        for (&from, &to) in others.iter().zip(&image) {
            perm[from] = to;
        }
        let relabeled = graph.relabeled(&perm)?;
        let relabeled_u = utility(&relabeled)?;
        checked += 1;
        for &i in &others {
            let original = base.get(i).expect("candidate node");
            let mapped = relabeled_u.get(perm[i]).expect("candidate node");
            if original != mapped {
                return Ok(ExchangeabilityOutcome::Fail {
                    witness: ExchangeabilityWitness {
                        permutation: perm,
                        node: i,
                        utility_original: original,
                        utility_relabeled: mapped,
                    },
                });
            }
        }
    }
    Ok(ExchangeabilityOutcome::Pass { permutations_checked: checked })
}

/// Smallest set size β whose top utilities reach `fraction` of the total
/// utility. Ties take larger utilities first, stable on node index.
pub fn concentration_beta(utility: &UtilityVector, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let total = utility.total();
    if total <= 0.0 {
        return Err(Error::UndefinedConcentration);
    }
    let mut sorted: Vec<(usize, f64)> = utility.iter().collect();
    sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut acc = 0.0;
    for (count, (_, v)) in sorted.iter().enumerate() {
        acc += v;
        if acc >= fraction * total {
            return Ok(count + 1);
        }
    }
    Ok(sorted.len()) // float shortfall: every node together is the answer
}

/// Partition of the non-target nodes at the threshold (1−c)·u_max.
#[derive(Debug, Clone, Serialize)]
pub struct UtilitySplit {
    pub c: f64,
    /// |V_hi|: nodes with utility strictly above the threshold.
    pub k: usize,
    pub v_hi: Vec<usize>,
    pub v_lo: Vec<usize>,
}

/// (c, |V_hi|) pairs across a whole grid of split parameters, the shape the
/// bound comparison consumes.
pub fn grid_splits(utility: &UtilityVector, c_grid: &[f64]) -> Result<Vec<(f64, u64)>> {
    c_grid
        .iter()
        .map(|&c| utility_split(utility, c).map(|s| (c, s.k as u64)))
        .collect()
}

/// Splits nodes into V_hi (utility strictly greater than (1−c)·u_max) and
/// V_lo (the rest).
pub fn utility_split(utility: &UtilityVector, c: f64) -> Result<UtilitySplit> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParameter(format!("c must lie in (0, 1), got {c}")));
    }
    let threshold = (1.0 - c) * utility.u_max();
    let (v_hi, v_lo): (Vec<usize>, Vec<usize>) =
        utility.iter().partition_map(|(node, u)| {
            if u > threshold {
                itertools::Either::Left(node)
            } else {
                itertools::Either::Right(node)
            }
        });
    Ok(UtilitySplit { c, k: v_hi.len(), v_hi, v_lo })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: usize) -> ContactGraph {
        let edges: Vec<(usize, usize)> = (1..=leaves).map(|i| (0, i)).collect();
        ContactGraph::new(leaves + 1, 0, &edges).unwrap()
    }

    #[test]
    fn direct_edge_on_star_is_all_ones() {
        let u = structural_utility(&star(4), UtilityKind::DirectEdge).unwrap();
        assert_eq!(u.len(), 4);
        assert!(u.iter().all(|(_, v)| v == 1.0));
    }

    #[test]
    fn common_neighbors_on_triangle() {
        // r=0, a=1, b=2 with edges r–a, r–b, a–b: each of a,b shares exactly
        // the other as a neighbor with r.
        let g = ContactGraph::new(3, 0, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let u = structural_utility(&g, UtilityKind::CommonNeighbors).unwrap();
        assert_eq!(u.get(1), Some(1.0));
        assert_eq!(u.get(2), Some(1.0));
    }

    #[test]
    fn empty_graph_has_zero_utility() {
        let g = ContactGraph::new(5, 2, &[]).unwrap();
        for kind in [UtilityKind::DirectEdge, UtilityKind::CommonNeighbors] {
            let u = structural_utility(&g, kind).unwrap();
            assert!(u.is_all_zero());
        }
    }

    #[test]
    fn builtin_kinds_are_exchangeable() {
        let graphs = [
            ContactGraph::new(4, 0, &[(0, 1), (1, 2), (2, 3)]).unwrap(),
            ContactGraph::new(5, 1, &[(0, 1), (0, 2), (3, 4), (1, 3)]).unwrap(),
            star(5),
        ];
        for g in &graphs {
            for kind in [UtilityKind::DirectEdge, UtilityKind::CommonNeighbors] {
                let outcome =
                    exchangeability_check(g, |g| structural_utility(g, kind)).unwrap();
                assert!(outcome.passed(), "{} failed on {:?}", kind.name(), g.edges());
            }
        }
    }

    #[test]
    fn node_id_dependent_utility_fails_with_witness() {
        // u_i = i on a 4-node path: two structurally equivalent nodes carry
        // different utilities, so some relabeling must expose it.
        let g = ContactGraph::new(4, 0, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let outcome = exchangeability_check(&g, |g| {
            let values = g.candidates().map(|i| (i, i as f64)).collect();
            UtilityVector::new(g.target(), values)
        })
        .unwrap();
        match outcome {
            ExchangeabilityOutcome::Fail { witness } => {
                assert_ne!(witness.utility_original, witness.utility_relabeled);
            }
            ExchangeabilityOutcome::Pass { .. } => panic!("expected a violation"),
        }
    }

    #[test]
    fn exchangeability_cap() {
        let g = ContactGraph::new(10, 0, &[]).unwrap();
        let err = exchangeability_check(&g, |g| structural_utility(g, UtilityKind::DirectEdge))
            .unwrap_err();
        assert!(matches!(err, Error::Scale(_)));
    }

    #[test]
    fn concentration_examples() {
        let u = UtilityVector::from_dense(0, &[5.0, 3.0, 1.0, 1.0]).unwrap();
        assert_eq!(concentration_beta(&u, 0.5).unwrap(), 1);

        let uniform = UtilityVector::from_dense(0, &[2.0; 7]).unwrap();
        assert_eq!(concentration_beta(&uniform, 0.5).unwrap(), 4); // ⌈7/2⌉

        let u = UtilityVector::from_dense(0, &[4.0, 4.0, 1.0, 1.0]).unwrap();
        assert_eq!(concentration_beta(&u, 0.9).unwrap(), 3); // 4+4+1 = 9 ≥ 9
    }

    #[test]
    fn concentration_rejects_zero_utility_and_bad_fraction() {
        let zeros = UtilityVector::from_dense(0, &[0.0, 0.0]).unwrap();
        assert!(matches!(
            concentration_beta(&zeros, 0.5).unwrap_err(),
            Error::UndefinedConcentration
        ));
        let u = UtilityVector::from_dense(0, &[1.0]).unwrap();
        assert!(concentration_beta(&u, 0.0).is_err());
        assert!(concentration_beta(&u, 1.5).is_err());
    }

    #[test]
    fn split_examples() {
        let u = UtilityVector::from_dense(0, &[10.0, 9.0, 1.0, 1.0]).unwrap();
        let s = utility_split(&u, 0.5).unwrap();
        assert_eq!(s.k, 2);
        assert_eq!(s.v_hi, vec![1, 2]); // nodes carrying 10 and 9
        assert_eq!(s.v_hi.len() + s.v_lo.len(), 4);

        // c → 1⁻ with positive utilities: everybody clears the threshold
        let s = utility_split(&u, 0.999).unwrap();
        assert_eq!(s.k, 4);

        // constant positive utility: u_i = u_max > (1−c)·u_max for any c
        let constant = UtilityVector::from_dense(0, &[2.0; 5]).unwrap();
        for c in [0.1, 0.5, 0.9] {
            assert_eq!(utility_split(&constant, c).unwrap().k, 5);
        }
    }

    #[test]
    fn split_rejects_out_of_range_c() {
        let u = UtilityVector::from_dense(0, &[1.0]).unwrap();
        assert!(utility_split(&u, 0.0).is_err());
        assert!(utility_split(&u, 1.0).is_err());
    }

    #[test]
    fn min_elevation_edits_on_one_edge_star() {
        let g = ContactGraph::new(5, 0, &[(0, 1)]).unwrap();
        let u = structural_utility(&g, UtilityKind::DirectEdge).unwrap();
        assert_eq!(g.min_elevation_edits(&u).unwrap(), Some(1));

        let complete_star = star(4);
        let cu = structural_utility(&complete_star, UtilityKind::DirectEdge).unwrap();
        assert_eq!(complete_star.min_elevation_edits(&cu).unwrap(), None); // constant u
    }
}
