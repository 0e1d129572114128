//! Scenario files: versioned JSON descriptions of an experiment.
//!
//! A scenario pins everything that matters for reproducibility: the
//! experiment kind, its parameter block, the trial count, and the master
//! seed from which every per-trial RNG stream is derived. Two runs of the
//! same scenario produce byte-identical CSV.

use serde::{Deserialize, Serialize};

use enlab_core::attacks::DEFAULT_BRUTE_FORCE_CAP;
use enlab_core::bounds::LogBase;
use enlab_core::graph::{ContactLog, GraphSpec, RecommenderKind, UtilityKind};
use enlab_core::oracle::NoiseMechanism;

/// The one schema version this build reads.
pub const SCHEMA_VERSION: u32 = 1;

/// Frontier audits enumerate all one-edge neighbors of every family graph;
/// the exhaustive claim is only affordable on small graphs.
pub const FRONTIER_MAX_N: usize = 5;

/// dp-audit enumerates n(n−1)/2 neighbor graphs; keep it interactive.
pub const DP_AUDIT_MAX_N: usize = 100;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub id: String,
    pub master_seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    pub experiment: ExperimentSpec,
}

fn default_trials() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// One attack against fresh oracles, `trials` times.
    Reconstruct {
        n: usize,
        prevalence: f64,
        mechanism: NoiseMechanism,
        attack: AttackSpec,
    },
    /// Brute-force reconstruction across a grid of noise bounds f, with the
    /// 4f distance guarantee asserted on every row.
    NoiseSweep {
        n: usize,
        prevalence: f64,
        f_grid: Vec<f64>,
    },
    /// Exponential-mechanism sweep: audited ε, empirical accuracy, and
    /// analytic lower bounds per (eps_param, graph) point.
    Frontier {
        utility: UtilityKind,
        #[serde(default = "default_sensitivity")]
        sensitivity: f64,
        eps_grid: Vec<f64>,
        c_grid: Vec<f64>,
        #[serde(default = "default_beta_fraction")]
        beta_fraction: f64,
        #[serde(default = "default_log_base")]
        log_base: LogBase,
        graphs: Vec<GraphSpec>,
    },
    /// One exhaustive edge-DP audit of a recommender on one graph.
    DpAudit {
        graph: GraphSource,
        utility: UtilityKind,
        recommender: RecommenderKind,
        eps_claim: f64,
    },
    /// Closed-form bound evaluations.
    Bounds { requests: Vec<BoundRequest> },
}

fn default_sensitivity() -> f64 {
    1.0
}

fn default_beta_fraction() -> f64 {
    0.5
}

fn default_log_base() -> LogBase {
    LogBase::E
}

impl ExperimentSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ExperimentSpec::Reconstruct { .. } => "reconstruct",
            ExperimentSpec::NoiseSweep { .. } => "noise-sweep",
            ExperimentSpec::Frontier { .. } => "frontier",
            ExperimentSpec::DpAudit { .. } => "dp-audit",
            ExperimentSpec::Bounds { .. } => "bounds",
        }
    }
}

pub const EXPERIMENT_KINDS: [&str; 5] =
    ["reconstruct", "noise-sweep", "frontier", "dp-audit", "bounds"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AttackSpec {
    /// Consistency search at bound `f`.
    BruteForce { f: f64 },
    /// Least-squares relaxation over `num_queries` uniform random subsets.
    RelaxAndRound {
        num_queries: usize,
        #[serde(default = "default_max_iters")]
        max_iters: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Zero-noise group testing (requires the exact mechanism).
    AdaptiveSplit,
    /// Per-block brute force at bound `f` over contiguous blocks.
    SplitBlocks { f: f64, block_size: usize },
}

fn default_max_iters() -> usize {
    2000
}

fn default_tol() -> f64 {
    1e-10
}

impl AttackSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AttackSpec::BruteForce { .. } => "brute-force",
            AttackSpec::RelaxAndRound { .. } => "relax-and-round",
            AttackSpec::AdaptiveSplit => "adaptive-split",
            AttackSpec::SplitBlocks { .. } => "split-database",
        }
    }
}

/// A graph given directly as an edge list, or as a raw contact/report log
/// to run through edge construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Log(ContactLog),
    Spec(GraphSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundRequest {
    Lemma1 { t: u32, c: f64, delta: f64, n: u64, k: u64 },
    Theorem4 { n: u64, beta: u64, d_max: u64, log_base: LogBase },
    Reconstruction { n: u64, f: f64 },
}

/// A scenario-level validation failure; the message names the offending
/// field.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid scenario: {}", self.0)
    }
}

impl std::error::Error for ValidationError {}

impl Scenario {
    /// Parses and validates a scenario document. Unknown experiment kinds
    /// and malformed blocks are reported with the field that failed; JSON
    /// syntax errors carry serde's line/column anchor.
    pub fn from_json(text: &str) -> Result<Self, ValidationError> {
        // pre-check the tag so an unknown kind names the field rather than
        // surfacing as an opaque enum error
        let raw: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| ValidationError(format!("JSON parse error: {e}")))?;
        if let Some(kind) = raw.pointer("/experiment/kind") {
            let kind = kind.as_str().unwrap_or("");
            if !EXPERIMENT_KINDS.contains(&kind) {
                return Err(ValidationError(format!(
                    "experiment.kind: unknown experiment kind {kind:?} (expected one of {})",
                    EXPERIMENT_KINDS.join(", ")
                )));
            }
        }
        let scenario: Scenario = serde_json::from_str(text)
            .map_err(|e| ValidationError(format!("field error: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let err = |msg: String| Err(ValidationError(msg));
        if self.schema != SCHEMA_VERSION {
            return err(format!(
                "schema: expected {SCHEMA_VERSION}, got {}",
                self.schema
            ));
        }
        if self.id.is_empty() {
            return err("id: must be non-empty".into());
        }
        if self.trials < 1 {
            return err("trials: must be ≥ 1".into());
        }
        match &self.experiment {
            ExperimentSpec::Reconstruct { n, prevalence, mechanism, attack } => {
                if *n < 1 {
                    return err("experiment.n: must be ≥ 1".into());
                }
                if !(0.0..=1.0).contains(prevalence) {
                    return err(format!("experiment.prevalence: {prevalence} outside [0, 1]"));
                }
                if let Err(e) = mechanism.validate() {
                    return err(format!("experiment.mechanism: {e}"));
                }
                match attack {
                    AttackSpec::BruteForce { f } => {
                        if *n > DEFAULT_BRUTE_FORCE_CAP {
                            return err(format!(
                                "experiment.n: {n} over the brute-force cap {DEFAULT_BRUTE_FORCE_CAP}"
                            ));
                        }
                        if !(f.is_finite() && *f > 0.0) {
                            return err(format!("experiment.attack.f: {f} must be > 0"));
                        }
                    }
                    AttackSpec::RelaxAndRound { num_queries, max_iters, tol } => {
                        if *num_queries < 1 {
                            return err("experiment.attack.num_queries: must be ≥ 1".into());
                        }
                        if *max_iters < 1 {
                            return err("experiment.attack.max_iters: must be ≥ 1".into());
                        }
                        if !(tol.is_finite() && *tol > 0.0) {
                            return err(format!("experiment.attack.tol: {tol} must be > 0"));
                        }
                    }
                    AttackSpec::AdaptiveSplit => {
                        if *mechanism != NoiseMechanism::Exact {
                            return err(
                                "experiment.attack: adaptive-split requires the exact mechanism"
                                    .into(),
                            );
                        }
                    }
                    AttackSpec::SplitBlocks { f, block_size } => {
                        if *block_size < 1 || *block_size > DEFAULT_BRUTE_FORCE_CAP {
                            return err(format!(
                                "experiment.attack.block_size: {block_size} outside 1..={DEFAULT_BRUTE_FORCE_CAP}"
                            ));
                        }
                        if !(f.is_finite() && *f > 0.0) {
                            return err(format!("experiment.attack.f: {f} must be > 0"));
                        }
                    }
                }
            }
            ExperimentSpec::NoiseSweep { n, prevalence, f_grid } => {
                if *n < 1 || *n > DEFAULT_BRUTE_FORCE_CAP {
                    return err(format!(
                        "experiment.n: {n} outside 1..={DEFAULT_BRUTE_FORCE_CAP}"
                    ));
                }
                if !(0.0..=1.0).contains(prevalence) {
                    return err(format!("experiment.prevalence: {prevalence} outside [0, 1]"));
                }
                if f_grid.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
                    return err("experiment.f_grid: entries must be finite and > 0".into());
                }
            }
            ExperimentSpec::Frontier {
                sensitivity,
                eps_grid,
                c_grid,
                beta_fraction,
                graphs,
                ..
            } => {
                if !(sensitivity.is_finite() && *sensitivity > 0.0) {
                    return err(format!("experiment.sensitivity: {sensitivity} must be > 0"));
                }
                if eps_grid.is_empty() || eps_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                    return err("experiment.eps_grid: needs finite entries > 0".into());
                }
                if c_grid.is_empty() || c_grid.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
                    return err("experiment.c_grid: entries must lie in (0, 1)".into());
                }
                if !(*beta_fraction > 0.0 && *beta_fraction <= 1.0) {
                    return err(format!(
                        "experiment.beta_fraction: {beta_fraction} outside (0, 1]"
                    ));
                }
                if graphs.is_empty() {
                    return err("experiment.graphs: needs at least one graph".into());
                }
                let n0 = graphs[0].n;
                for (i, g) in graphs.iter().enumerate() {
                    if g.n > FRONTIER_MAX_N {
                        return err(format!(
                            "experiment.graphs[{i}].n: {} over the exhaustive-audit cap {FRONTIER_MAX_N}",
                            g.n
                        ));
                    }
                    if g.n != n0 || g.target != graphs[0].target {
                        return err(
                            "experiment.graphs: all graphs must share n and target".into(),
                        );
                    }
                    if let Err(e) = g.build() {
                        return err(format!("experiment.graphs[{i}]: {e}"));
                    }
                }
            }
            ExperimentSpec::DpAudit { graph, eps_claim, recommender, .. } => {
                if !(eps_claim.is_finite() && *eps_claim >= 0.0) {
                    return err(format!("experiment.eps_claim: {eps_claim} must be ≥ 0"));
                }
                if let RecommenderKind::Exponential { eps_param, sensitivity } = recommender {
                    if !(eps_param.is_finite() && *eps_param > 0.0) {
                        return err(format!(
                            "experiment.recommender.eps_param: {eps_param} must be > 0"
                        ));
                    }
                    if !(sensitivity.is_finite() && *sensitivity > 0.0) {
                        return err(format!(
                            "experiment.recommender.sensitivity: {sensitivity} must be > 0"
                        ));
                    }
                }
                let n = match graph {
                    GraphSource::Spec(s) => s.n,
                    GraphSource::Log(l) => l.n,
                };
                if n > DP_AUDIT_MAX_N {
                    return err(format!(
                        "experiment.graph.n: {n} over the audit cap {DP_AUDIT_MAX_N}"
                    ));
                }
            }
            ExperimentSpec::Bounds { requests } => {
                if requests.is_empty() {
                    return err("experiment.requests: needs at least one request".into());
                }
            }
        }
        Ok(())
    }
}
