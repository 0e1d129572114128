//! Contact graphs and alerting-as-recommendation.
//!
//! Nodes are app users; an edge means the pair had a contact event AND one
//! of them reported a positive diagnosis within the configured window around
//! that contact. Alerting a designated target node about its risky contacts
//! is modeled as a probabilistic recommendation over the non-target nodes,
//! which makes edge differential privacy the natural privacy notion.

mod audit;
mod recommend;
mod utility;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use audit::{dp_audit, AuditWitness, DpAuditReport, EdgeChange};
pub use recommend::{
    empirical_accuracy, expected_utility, monotonicity_check, MonotonicityOutcome,
    MonotonicityWitness, RecommendationDistribution, RecommenderKind,
};
pub use utility::{
    concentration_beta, exchangeability_check, grid_splits, structural_utility, utility_split,
    ExchangeabilityOutcome, ExchangeabilityWitness, UtilityKind, UtilitySplit, UtilityVector,
};

/// Simple undirected graph over nodes `0..n` with a designated target node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactGraph {
    n: usize,
    target: usize,
    adjacency: Vec<BTreeSet<usize>>,
}

impl ContactGraph {
    /// Builds a graph from explicit edges. Self-loops, duplicate edges, and
    /// out-of-range nodes are rejected; `n ≥ 2` so at least one non-target
    /// node exists to recommend.
    pub fn new(n: usize, target: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "graph needs at least 2 nodes, got {n}"
            )));
        }
        if target >= n {
            return Err(Error::InvalidParameter(format!(
                "target {target} out of range for {n} nodes"
            )));
        }
        let mut g = Self {
            n,
            target,
            adjacency: vec![BTreeSet::new(); n],
        };
        for &(a, b) in edges {
            g.insert_edge(a, b)?;
        }
        Ok(g)
    }

    fn insert_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::InvalidParameter(format!("self-loop at node {a}")));
        }
        if a >= self.n || b >= self.n {
            return Err(Error::InvalidParameter(format!(
                "edge ({a}, {b}) out of range for {} nodes",
                self.n
            )));
        }
        if !self.adjacency[a].insert(b) {
            return Err(Error::InvalidParameter(format!("duplicate edge ({a}, {b})")));
        }
        self.adjacency[b].insert(a);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a).is_some_and(|s| s.contains(&b))
    }

    pub fn neighbors(&self, node: usize) -> &BTreeSet<usize> {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Non-target nodes in index order.
    pub fn candidates(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| v != self.target)
    }

    /// Edges as ordered pairs (a < b), deterministic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for &b in &self.adjacency[a] {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// The graph with one edge toggled (added if absent, removed if present).
    pub fn with_edge_toggled(&self, a: usize, b: usize) -> Result<(Self, EdgeChange)> {
        if a == b || a >= self.n || b >= self.n {
            return Err(Error::InvalidParameter(format!(
                "cannot toggle pair ({a}, {b})"
            )));
        }
        let mut g = self.clone();
        let change = if g.adjacency[a].remove(&b) {
            g.adjacency[b].remove(&a);
            EdgeChange::Removed
        } else {
            g.adjacency[a].insert(b);
            g.adjacency[b].insert(a);
            EdgeChange::Added
        };
        Ok((g, change))
    }

    /// All graphs differing from this one in exactly one edge: every node
    /// pair toggled once, n(n−1)/2 neighbors.
    pub fn one_edge_neighbors(&self) -> Vec<(ContactGraph, (usize, usize), EdgeChange)> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for a in 0..self.n {
            for b in a + 1..self.n {
                let (g, change) = self.with_edge_toggled(a, b).expect("valid pair");
                out.push((g, (a, b), change));
            }
        }
        out
    }

    /// Relabels nodes by `perm` (new id of node v is `perm[v]`), keeping the
    /// edge structure. Used by the exchangeability check with permutations
    /// that fix the target.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter("permutation length mismatch".into()));
        }
        let edges: Vec<(usize, usize)> =
            self.edges().iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Self::new(self.n, perm[self.target], &edges)
    }

    /// Number of edge edits turning `low`'s connections into `high`'s: the
    /// symmetric difference of N(low)∖{high} and N(high)∖{low}. The mutual
    /// edge, if any, is preserved by the relabeling and never needs editing.
    pub fn edit_distance_t(&self, low: usize, high: usize) -> Result<usize> {
        for node in [low, high] {
            if node >= self.n {
                return Err(Error::InvalidParameter(format!("node {node} out of range")));
            }
            if node == self.target {
                return Err(Error::InvalidParameter(
                    "edit distance is defined between non-target nodes".into(),
                ));
            }
        }
        let a: BTreeSet<usize> =
            self.adjacency[low].iter().copied().filter(|&v| v != high).collect();
        let b: BTreeSet<usize> =
            self.adjacency[high].iter().copied().filter(|&v| v != low).collect();
        Ok(a.symmetric_difference(&b).count())
    }

    /// Smallest `edit_distance_t` over (lowest-utility × highest-utility)
    /// node pairs; `None` when the utility is constant (no pair to elevate).
    pub fn min_elevation_edits(&self, utility: &UtilityVector) -> Result<Option<usize>> {
        let (lows, highs) = utility.argmin_argmax();
        if utility.u_max() == utility.u_min() {
            return Ok(None);
        }
        let mut best = None;
        for &l in &lows {
            for &h in &highs {
                let t = self.edit_distance_t(l, h)?;
                best = Some(best.map_or(t, |b: usize| b.min(t)));
            }
        }
        Ok(best)
    }
}

/// Edge-list wire form of a graph: `{"n": ..., "target": ..., "edges": [[a,b], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub target: usize,
    #[serde(default)]
    pub edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    pub fn build(&self) -> Result<ContactGraph> {
        ContactGraph::new(self.n, self.target, &self.edges)
    }
}

/// Raw event log: contact events between node pairs and positive reports,
/// both timestamped. `{"n", "target", "contacts": [[a,b,t]...],
/// "positives": [[node,t]...], "window"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactLog {
    pub n: usize,
    pub target: usize,
    pub contacts: Vec<(usize, usize, i64)>,
    pub positives: Vec<(usize, i64)>,
    /// An edge forms when a positive report lands within `window` time units
    /// of the contact event.
    pub window: i64,
}

/// Builds the contact graph: edge (a,b) present iff a contact event between
/// a and b has a positive report by a or b within the window around it.
pub fn build_graph(log: &ContactLog) -> Result<ContactGraph> {
    if log.window < 0 {
        return Err(Error::Ingestion(format!("window must be ≥ 0, got {}", log.window)));
    }
    for &(a, b, _) in &log.contacts {
        if a >= log.n || b >= log.n {
            return Err(Error::Ingestion(format!(
                "contact ({a}, {b}) references a node outside 0..{}",
                log.n
            )));
        }
        if a == b {
            return Err(Error::Ingestion(format!("contact of node {a} with itself")));
        }
    }
    for &(v, _) in &log.positives {
        if v >= log.n {
            return Err(Error::Ingestion(format!(
                "positive report for node {v} outside 0..{}",
                log.n
            )));
        }
    }

    let mut edges = BTreeSet::new();
    for &(a, b, t) in &log.contacts {
        let reported = log
            .positives
            .iter()
            .any(|&(v, tr)| (v == a || v == b) && (tr - t).abs() <= log.window);
        if reported {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    ContactGraph::new(log.n, log.target, &edges)
}
