//! Empirical edge differential privacy audit.
//!
//! Enumerates every graph differing from the input in exactly one edge
//! (all additions and deletions) and measures the worst log-probability
//! ratio the recommender exhibits on any node. A deterministic recommender
//! that moves mass off a node entirely is flagged unbounded: no finite ε
//! explains a positive/zero ratio.

use serde::Serialize;

use crate::error::Result;

use super::{ContactGraph, RecommendationDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeChange {
    Added,
    Removed,
}

/// The neighbor pair and node achieving the reported worst ratio.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditWitness {
    pub edge: (usize, usize),
    pub change: EdgeChange,
    pub node: usize,
    /// |ln(p/p′)| at that node, infinite for a one-sided zero.
    pub log_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DpAuditReport {
    pub eps_claim: f64,
    /// Max |ln(p_i(G)/p_i(G′))| over neighbors and nodes, zeros excluded.
    pub max_ratio: f64,
    /// True when some node has positive probability on one side of an edge
    /// flip and zero on the other.
    pub unbounded: bool,
    pub witness: Option<AuditWitness>,
    pub neighbors_checked: usize,
    pub pass: bool,
}

/// Tolerance added to the claim when deciding pass/fail.
pub const AUDIT_TOL: f64 = 1e-9;

/// Audits a graph→distribution recommender against an ε claim on one graph.
///
/// Both-zero probabilities count as ratio 1 (log-ratio 0); a one-sided zero
/// is a hard violation for every finite ε.
pub fn dp_audit<R>(recommend: R, graph: &ContactGraph, eps_claim: f64) -> Result<DpAuditReport>
where
    R: Fn(&ContactGraph) -> Result<RecommendationDistribution>,
{
    let base = recommend(graph)?;
    let mut max_ratio = 0.0f64;
    let mut unbounded = false;
    let mut witness: Option<AuditWitness> = None;
    let neighbors = graph.one_edge_neighbors();
    let neighbors_checked = neighbors.len();

    for (neighbor, edge, change) in neighbors {
        let other = recommend(&neighbor)?;
        for (node, p) in base.iter() {
            let q = other.get(node).unwrap_or(0.0);
            let log_ratio = match (p == 0.0, q == 0.0) {
                (true, true) => 0.0,
                (false, false) => (p / q).ln().abs(),
                _ => f64::INFINITY,
            };
            if log_ratio.is_infinite() {
                if !unbounded {
                    unbounded = true;
                    witness = Some(AuditWitness { edge, change, node, log_ratio });
                }
            } else if log_ratio > max_ratio {
                max_ratio = log_ratio;
                if !unbounded {
                    witness = Some(AuditWitness { edge, change, node, log_ratio });
                }
            }
        }
    }

    Ok(DpAuditReport {
        eps_claim,
        max_ratio,
        unbounded,
        witness,
        neighbors_checked,
        pass: !unbounded && max_ratio <= eps_claim + AUDIT_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{structural_utility, RecommenderKind, UtilityKind};

    fn graph_recommender(
        kind: UtilityKind,
        rec: RecommenderKind,
    ) -> impl Fn(&ContactGraph) -> Result<RecommendationDistribution> {
        move |g| rec.recommend(&structural_utility(g, kind)?)
    }

    #[test]
    fn uniform_recommender_passes_any_claim() {
        let g = ContactGraph::new(5, 0, &[(0, 1), (2, 3)]).unwrap();
        let report = dp_audit(
            graph_recommender(UtilityKind::DirectEdge, RecommenderKind::Uniform),
            &g,
            0.0,
        )
        .unwrap();
        assert_eq!(report.max_ratio, 0.0);
        assert!(!report.unbounded);
        assert!(report.pass);
        assert_eq!(report.neighbors_checked, 10);
    }

    #[test]
    fn r_best_is_unbounded_when_a_flip_moves_the_argmax() {
        // edges {(r,b)} with r=0: argmax is b; deleting (r,b) moves it to a.
        let g = ContactGraph::new(4, 0, &[(0, 2)]).unwrap();
        let report = dp_audit(
            graph_recommender(UtilityKind::DirectEdge, RecommenderKind::RBest),
            &g,
            1e9,
        )
        .unwrap();
        assert!(report.unbounded);
        assert!(!report.pass);
        let w = report.witness.unwrap();
        assert!(w.log_ratio.is_infinite());
    }

    #[test]
    fn exponential_mechanism_passes_its_own_eps() {
        let expo = RecommenderKind::Exponential { eps_param: 1.0, sensitivity: 1.0 };
        for edges in [vec![], vec![(0, 1)], vec![(0, 1), (0, 2)], vec![(0, 1), (2, 3)]] {
            let g = ContactGraph::new(5, 0, &edges).unwrap();
            let report =
                dp_audit(graph_recommender(UtilityKind::DirectEdge, expo), &g, 1.0).unwrap();
            assert!(!report.unbounded);
            assert!(report.pass, "max_ratio {} on {:?}", report.max_ratio, edges);
        }
    }

    #[test]
    fn non_target_flips_leave_direct_edge_distribution_alone() {
        // the measured worst ratio must come from a target-incident flip
        let expo = RecommenderKind::Exponential { eps_param: 2.0, sensitivity: 1.0 };
        let g = ContactGraph::new(4, 0, &[(0, 1)]).unwrap();
        let report = dp_audit(graph_recommender(UtilityKind::DirectEdge, expo), &g, 2.0).unwrap();
        let w = report.witness.unwrap();
        assert!(w.edge.0 == 0 || w.edge.1 == 0);
        assert!(report.max_ratio > 0.0);
    }
}
