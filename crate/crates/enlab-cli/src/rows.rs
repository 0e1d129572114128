//! Result rows and their deterministic serialization.
//!
//! Column order is fixed per experiment kind and floats are written with 12
//! significant digits, so a rerun of the same scenario produces a
//! byte-identical CSV. Wall-clock timings never enter the CSV (they would
//! break that guarantee); they live in the JSON row records and the summary.

use serde::Serialize;

/// 12-significant-digit float form used in every CSV cell.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.11e}", x)
}

fn opt_u64(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt_bool(x: Option<bool>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// A typed result row that knows its CSV shape.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

/// One attack trial.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructRow {
    pub scenario_id: String,
    pub master_seed: u64,
    pub attack: &'static str,
    pub mechanism: &'static str,
    pub n: usize,
    pub f: Option<f64>,
    pub trial: u64,
    pub seed: u64,
    pub distance: usize,
    pub queries_used: u64,
    pub elapsed_ms: f64,
    pub converged: Option<bool>,
    pub blocks: Option<u64>,
    pub meaningless_blocks: Option<u64>,
    pub verification_query_bound: Option<u64>,
}

impl CsvRow for ReconstructRow {
    fn header() -> &'static [&'static str] {
        &[
            "scenario_id",
            "master_seed",
            "attack",
            "mechanism",
            "n",
            "f",
            "trial",
            "seed",
            "distance",
            "queries_used",
            "converged",
            "blocks",
            "meaningless_blocks",
            "verification_query_bound",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.scenario_id.clone(),
            self.master_seed.to_string(),
            self.attack.to_string(),
            self.mechanism.to_string(),
            self.n.to_string(),
            opt_f64(self.f),
            self.trial.to_string(),
            self.seed.to_string(),
            self.distance.to_string(),
            self.queries_used.to_string(),
            opt_bool(self.converged),
            opt_u64(self.blocks),
            opt_u64(self.meaningless_blocks),
            opt_u64(self.verification_query_bound),
        ]
    }
}

/// One (f, trial) point of a noise sweep.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseSweepRow {
    pub scenario_id: String,
    pub master_seed: u64,
    pub n: usize,
    pub prevalence: f64,
    pub f: f64,
    pub trial: u64,
    pub seed: u64,
    pub distance: usize,
    pub queries_used: u64,
    pub bound_4f: f64,
    pub within_bound: bool,
}

impl CsvRow for NoiseSweepRow {
    fn header() -> &'static [&'static str] {
        &[
            "scenario_id",
            "master_seed",
            "n",
            "prevalence",
            "f",
            "trial",
            "seed",
            "distance",
            "queries_used",
            "bound_4f",
            "within_bound",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.scenario_id.clone(),
            self.master_seed.to_string(),
            self.n.to_string(),
            fmt_f64(self.prevalence),
            fmt_f64(self.f),
            self.trial.to_string(),
            self.seed.to_string(),
            self.distance.to_string(),
            self.queries_used.to_string(),
            fmt_f64(self.bound_4f),
            self.within_bound.to_string(),
        ]
    }
}

/// One (eps_param, graph) point of the privacy/accuracy frontier.
#[derive(Debug, Clone, Serialize)]
pub struct FrontierRow {
    pub scenario_id: String,
    pub master_seed: u64,
    pub eps_param: f64,
    pub graph: usize,
    /// Family-wide audited ε: max |ln p/p'| over every graph in the sweep.
    pub eps_measured: f64,
    /// This graph's own audit maximum.
    pub graph_max_ratio: f64,
    pub unbounded: bool,
    /// Family-wide empirical accuracy at this eps_param.
    pub accuracy: f64,
    pub delta: f64,
    pub t: Option<u64>,
    pub n_candidates: u64,
    pub lemma1_bound: Option<f64>,
    pub lemma1_c: Option<f64>,
    pub lemma1_k: Option<u64>,
    pub margin: Option<f64>,
    pub consistent: Option<bool>,
    pub excluded_reason: Option<&'static str>,
    pub theorem4_value: Option<f64>,
    pub beta: Option<u64>,
    pub d_max: u64,
}

impl CsvRow for FrontierRow {
    fn header() -> &'static [&'static str] {
        &[
            "scenario_id",
            "master_seed",
            "eps_param",
            "graph",
            "eps_measured",
            "graph_max_ratio",
            "unbounded",
            "accuracy",
            "delta",
            "t",
            "n_candidates",
            "lemma1_bound",
            "lemma1_c",
            "lemma1_k",
            "margin",
            "consistent",
            "excluded_reason",
            "theorem4_value",
            "beta",
            "d_max",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.scenario_id.clone(),
            self.master_seed.to_string(),
            fmt_f64(self.eps_param),
            self.graph.to_string(),
            fmt_f64(self.eps_measured),
            fmt_f64(self.graph_max_ratio),
            self.unbounded.to_string(),
            fmt_f64(self.accuracy),
            fmt_f64(self.delta),
            opt_u64(self.t),
            self.n_candidates.to_string(),
            opt_f64(self.lemma1_bound),
            opt_f64(self.lemma1_c),
            opt_u64(self.lemma1_k),
            opt_f64(self.margin),
            opt_bool(self.consistent),
            self.excluded_reason.unwrap_or_default().to_string(),
            opt_f64(self.theorem4_value),
            opt_u64(self.beta),
            self.d_max.to_string(),
        ]
    }
}

/// One exhaustive audit.
#[derive(Debug, Clone, Serialize)]
pub struct DpAuditRow {
    pub scenario_id: String,
    pub master_seed: u64,
    pub utility: &'static str,
    pub recommender: &'static str,
    pub eps_claim: f64,
    pub max_ratio: f64,
    pub unbounded: bool,
    pub pass: bool,
    pub neighbors_checked: usize,
    pub worst_edge_a: Option<u64>,
    pub worst_edge_b: Option<u64>,
    pub worst_node: Option<u64>,
}

impl CsvRow for DpAuditRow {
    fn header() -> &'static [&'static str] {
        &[
            "scenario_id",
            "master_seed",
            "utility",
            "recommender",
            "eps_claim",
            "max_ratio",
            "unbounded",
            "pass",
            "neighbors_checked",
            "worst_edge_a",
            "worst_edge_b",
            "worst_node",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.scenario_id.clone(),
            self.master_seed.to_string(),
            self.utility.to_string(),
            self.recommender.to_string(),
            fmt_f64(self.eps_claim),
            fmt_f64(self.max_ratio),
            self.unbounded.to_string(),
            self.pass.to_string(),
            self.neighbors_checked.to_string(),
            opt_u64(self.worst_edge_a),
            opt_u64(self.worst_edge_b),
            opt_u64(self.worst_node),
        ]
    }
}

/// One evaluated closed-form bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub scenario_id: String,
    pub master_seed: u64,
    pub kind: &'static str,
    pub t: Option<u64>,
    pub c: Option<f64>,
    pub delta: Option<f64>,
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub beta: Option<u64>,
    pub d_max: Option<u64>,
    pub log_base: Option<&'static str>,
    pub f: Option<f64>,
    pub value: f64,
    pub vacuous: bool,
    pub leaked: Option<u64>,
}

impl CsvRow for BoundsRow {
    fn header() -> &'static [&'static str] {
        &[
            "scenario_id",
            "master_seed",
            "kind",
            "t",
            "c",
            "delta",
            "n",
            "k",
            "beta",
            "d_max",
            "log_base",
            "f",
            "value",
            "vacuous",
            "leaked",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.scenario_id.clone(),
            self.master_seed.to_string(),
            self.kind.to_string(),
            opt_u64(self.t),
            opt_f64(self.c),
            opt_f64(self.delta),
            opt_u64(self.n),
            opt_u64(self.k),
            opt_u64(self.beta),
            opt_u64(self.d_max),
            self.log_base.unwrap_or_default().to_string(),
            opt_f64(self.f),
            fmt_f64(self.value),
            self.vacuous.to_string(),
            opt_u64(self.leaked),
        ]
    }
}

/// Writes rows as CSV bytes: UTF-8, header row, comma-separated, LF endings.
pub fn to_csv_bytes<R: CsvRow>(rows: &[R]) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(R::header()).expect("in-memory write");
    for row in rows {
        writer.write_record(row.record()).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}
