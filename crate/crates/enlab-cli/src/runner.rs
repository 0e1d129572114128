//! Experiment execution: derives per-trial seeds, drives the core
//! operations, and assembles deterministic result rows plus a JSON summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use serde_json::json;

use enlab_core::attacks::{
    adaptive_split_reconstruct, brute_force_reconstruct, relax_and_round_reconstruct,
    split_database_attack, uniform_random_queries, RelaxOptions,
};
use enlab_core::bounds::{
    bound_vs_empirical, BoundMeasurement, ConsistencyReport, InstanceOutcome, TradeoffBound,
};
use enlab_core::db::random_database;
use enlab_core::graph::{
    build_graph, concentration_beta, dp_audit, empirical_accuracy, grid_splits,
    monotonicity_check, structural_utility, ContactGraph, DpAuditReport, RecommenderKind,
    UtilityKind, UtilityVector,
};
use enlab_core::oracle::{NoiseMechanism, NoisyOracle};
use enlab_core::seed::derive_seed;

use crate::rows::{
    to_csv_bytes, BoundsRow, DpAuditRow, FrontierRow, NoiseSweepRow, ReconstructRow,
};
use crate::scenario::{
    AttackSpec, BoundRequest, ExperimentSpec, GraphSource, Scenario,
};

/// Tolerance for the analytic-vs-measured ε comparison.
pub const FRONTIER_MARGIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything a run produced, before or without touching the filesystem.
pub enum RunOutput {
    Reconstruct(Vec<ReconstructRow>),
    NoiseSweep(Vec<NoiseSweepRow>),
    Frontier {
        rows: Vec<FrontierRow>,
        report: ConsistencyReport,
    },
    DpAudit {
        rows: Vec<DpAuditRow>,
        report: DpAuditReport,
    },
    Bounds(Vec<BoundsRow>),
}

impl RunOutput {
    pub fn row_count(&self) -> usize {
        match self {
            RunOutput::Reconstruct(r) => r.len(),
            RunOutput::NoiseSweep(r) => r.len(),
            RunOutput::Frontier { rows, .. } => rows.len(),
            RunOutput::DpAudit { rows, .. } => rows.len(),
            RunOutput::Bounds(r) => r.len(),
        }
    }

    pub fn csv_bytes(&self) -> Vec<u8> {
        match self {
            RunOutput::Reconstruct(r) => to_csv_bytes(r),
            RunOutput::NoiseSweep(r) => to_csv_bytes(r),
            RunOutput::Frontier { rows, .. } => to_csv_bytes(rows),
            RunOutput::DpAudit { rows, .. } => to_csv_bytes(rows),
            RunOutput::Bounds(r) => to_csv_bytes(r),
        }
    }

    pub fn rows_json(&self) -> serde_json::Value {
        match self {
            RunOutput::Reconstruct(r) => json!(r),
            RunOutput::NoiseSweep(r) => json!(r),
            RunOutput::Frontier { rows, .. } => json!(rows),
            RunOutput::DpAudit { rows, .. } => json!(rows),
            RunOutput::Bounds(r) => json!(r),
        }
    }
}

/// Runs a validated scenario to completion in memory.
pub fn execute(scenario: &Scenario) -> anyhow::Result<RunOutput> {
    match &scenario.experiment {
        ExperimentSpec::Reconstruct { n, prevalence, mechanism, attack } => Ok(
            RunOutput::Reconstruct(run_reconstruct(scenario, *n, *prevalence, *mechanism, attack)?),
        ),
        ExperimentSpec::NoiseSweep { n, prevalence, f_grid } => Ok(RunOutput::NoiseSweep(
            run_noise_sweep(scenario, *n, *prevalence, f_grid)?,
        )),
        ExperimentSpec::Frontier {
            utility,
            sensitivity,
            eps_grid,
            c_grid,
            beta_fraction,
            log_base,
            graphs,
        } => {
            let built: Vec<ContactGraph> =
                graphs.iter().map(|g| g.build()).collect::<Result<_, _>>()?;
            let (rows, report) = run_frontier(
                scenario,
                *utility,
                *sensitivity,
                eps_grid,
                c_grid,
                *beta_fraction,
                *log_base,
                &built,
            )?;
            Ok(RunOutput::Frontier { rows, report })
        }
        ExperimentSpec::DpAudit { graph, utility, recommender, eps_claim } => {
            let built = match graph {
                GraphSource::Spec(spec) => spec.build()?,
                GraphSource::Log(log) => build_graph(log)?,
            };
            let (rows, report) = run_dp_audit(scenario, &built, *utility, *recommender, *eps_claim)?;
            Ok(RunOutput::DpAudit { rows, report })
        }
        ExperimentSpec::Bounds { requests } => Ok(RunOutput::Bounds(run_bounds(scenario, requests)?)),
    }
}

/// Sub-stream tags under one (parameter, trial) stream.
const STREAM_DB: u64 = 0;
const STREAM_ORACLE: u64 = 1;
const STREAM_QUERIES: u64 = 2;

fn trial_seed(master: u64, param_index: u64, trials: u64, trial: u64, sub: u64) -> u64 {
    derive_seed(master, (param_index * trials + trial) * 4 + sub)
}

fn run_reconstruct(
    scenario: &Scenario,
    n: usize,
    prevalence: f64,
    mechanism: NoiseMechanism,
    attack: &AttackSpec,
) -> anyhow::Result<Vec<ReconstructRow>> {
    let mut rows = Vec::with_capacity(scenario.trials as usize);
    for trial in 0..scenario.trials {
        let seed = trial_seed(scenario.master_seed, 0, scenario.trials, trial, STREAM_ORACLE);
        let db_seed = trial_seed(scenario.master_seed, 0, scenario.trials, trial, STREAM_DB);
        let truth = random_database(n, prevalence, db_seed)?;
        let mut oracle = NoisyOracle::new(truth.clone(), mechanism, seed)?;

        let (result, f, blocks, meaningless, verification_bound) = match attack {
            AttackSpec::BruteForce { f } => {
                let r = brute_force_reconstruct(&mut oracle, n, *f)?;
                (r, Some(*f), None, None, None)
            }
            AttackSpec::RelaxAndRound { num_queries, max_iters, tol } => {
                let qseed =
                    trial_seed(scenario.master_seed, 0, scenario.trials, trial, STREAM_QUERIES);
                let queries = uniform_random_queries(n, *num_queries, qseed);
                let opts = RelaxOptions { max_iters: *max_iters, tol: *tol };
                let r = relax_and_round_reconstruct(&mut oracle, n, &queries, &opts)?;
                (r, None, None, None, None)
            }
            AttackSpec::AdaptiveSplit => {
                let r = adaptive_split_reconstruct(&mut oracle, n)?;
                (r, None, None, None, None)
            }
            AttackSpec::SplitBlocks { f, block_size } => {
                let outcome = split_database_attack(&mut oracle, n, *block_size, *f)?;
                let meaningless =
                    outcome.blocks.iter().filter(|b| b.meaningless_bound).count() as u64;
                let blocks = outcome.blocks.len() as u64;
                let verification = outcome.verification_query_bound_total;
                (outcome.combined, Some(*f), Some(blocks), Some(meaningless), Some(verification))
            }
        };
        let result = result.with_distance(&truth)?;
        rows.push(ReconstructRow {
            scenario_id: scenario.id.clone(),
            master_seed: scenario.master_seed,
            attack: result.attack_name,
            mechanism: mechanism.name(),
            n,
            f,
            trial,
            seed,
            distance: result.distance.expect("distance filled"),
            queries_used: result.queries_used,
            elapsed_ms: result.elapsed.as_secs_f64() * 1e3,
            converged: result.converged,
            blocks,
            meaningless_blocks: meaningless,
            verification_query_bound: verification_bound,
        });
    }
    Ok(rows)
}

fn run_noise_sweep(
    scenario: &Scenario,
    n: usize,
    prevalence: f64,
    f_grid: &[f64],
) -> anyhow::Result<Vec<NoiseSweepRow>> {
    let mut rows = Vec::with_capacity(f_grid.len() * scenario.trials as usize);
    for (fi, &f) in f_grid.iter().enumerate() {
        for trial in 0..scenario.trials {
            let db_seed =
                trial_seed(scenario.master_seed, fi as u64, scenario.trials, trial, STREAM_DB);
            let oracle_seed =
                trial_seed(scenario.master_seed, fi as u64, scenario.trials, trial, STREAM_ORACLE);
            let truth = random_database(n, prevalence, db_seed)?;
            let mut oracle = NoisyOracle::new(
                truth.clone(),
                NoiseMechanism::BoundedUniform { f },
                oracle_seed,
            )?;
            let result = brute_force_reconstruct(&mut oracle, n, f)?.with_distance(&truth)?;
            let distance = result.distance.expect("distance filled");
            let within = (distance as f64) <= 4.0 * f;
            rows.push(NoiseSweepRow {
                scenario_id: scenario.id.clone(),
                master_seed: scenario.master_seed,
                n,
                prevalence,
                f,
                trial,
                seed: oracle_seed,
                distance,
                queries_used: result.queries_used,
                bound_4f: 4.0 * f,
                within_bound: within,
            });
            if !within {
                bail!(
                    "noise sweep violated the 4f guarantee: distance {distance} > {} at f = {f}, trial {trial}",
                    4.0 * f
                );
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn run_frontier(
    scenario: &Scenario,
    utility_kind: UtilityKind,
    sensitivity: f64,
    eps_grid: &[f64],
    c_grid: &[f64],
    beta_fraction: f64,
    log_base: enlab_core::bounds::LogBase,
    graphs: &[ContactGraph],
) -> anyhow::Result<(Vec<FrontierRow>, ConsistencyReport)> {
    let utilities: Vec<UtilityVector> = graphs
        .iter()
        .map(|g| structural_utility(g, utility_kind))
        .collect::<Result<_, _>>()?;
    let accuracy_family: Vec<UtilityVector> =
        utilities.iter().filter(|u| !u.is_all_zero()).cloned().collect();
    if accuracy_family.is_empty() {
        bail!("frontier graph family has no nonzero utility vector; accuracy is undefined");
    }

    // eps-independent instance structure
    struct GraphInstance {
        t: Option<u32>,
        splits: Vec<(f64, u64)>,
        beta: Option<u64>,
        theorem4_value: Option<f64>,
        d_max: u64,
    }
    let per_graph: Vec<GraphInstance> = graphs
        .iter()
        .zip(&utilities)
        .map(|(g, u)| -> anyhow::Result<GraphInstance> {
            let t = g.min_elevation_edits(u)?.map(|t| t as u32);
            let splits = grid_splits(u, c_grid)?;
            let d_max = g.max_degree() as u64;
            let (beta, theorem4_value) = if u.is_all_zero() || d_max == 0 {
                (None, None)
            } else {
                let beta = concentration_beta(u, beta_fraction)? as u64;
                let value =
                    enlab_core::bounds::theorem4_eps_lower(g.n() as u64, beta, d_max, log_base)
                        .ok();
                (Some(beta), value)
            };
            Ok(GraphInstance { t, splits, beta, theorem4_value, d_max })
        })
        .collect::<anyhow::Result<_>>()?;

    let mut rows = Vec::new();
    let mut measurements = Vec::new();
    for &eps in eps_grid {
        let rec = RecommenderKind::Exponential { eps_param: eps, sensitivity };
        let accuracy = empirical_accuracy(|u| rec.recommend(u), &accuracy_family)?;
        let delta = 1.0 - accuracy;

        let audits: Vec<DpAuditReport> = graphs
            .iter()
            .map(|g| {
                dp_audit(
                    |g| rec.recommend(&structural_utility(g, utility_kind)?),
                    g,
                    eps,
                )
            })
            .collect::<Result<_, _>>()?;
        let eps_measured =
            audits.iter().map(|a| a.max_ratio).fold(0.0, f64::max);
        let unbounded = audits.iter().any(|a| a.unbounded);

        for (gi, graph) in graphs.iter().enumerate() {
            let u = &utilities[gi];
            let p = rec.recommend(u)?;
            let monotone = monotonicity_check(u, &p)?.passed();
            let inst = &per_graph[gi];
            measurements.push(BoundMeasurement {
                label: format!("eps={eps}/graph={gi}"),
                eps_measured,
                unbounded,
                monotone,
                accuracy,
                t: inst.t,
                n: (graph.n() - 1) as u64,
                splits: inst.splits.clone(),
            });
            rows.push(FrontierRow {
                scenario_id: scenario.id.clone(),
                master_seed: scenario.master_seed,
                eps_param: eps,
                graph: gi,
                eps_measured,
                graph_max_ratio: audits[gi].max_ratio,
                unbounded,
                accuracy,
                delta,
                t: inst.t.map(u64::from),
                n_candidates: (graph.n() - 1) as u64,
                lemma1_bound: None,
                lemma1_c: None,
                lemma1_k: None,
                margin: None,
                consistent: None,
                excluded_reason: None,
                theorem4_value: inst.theorem4_value,
                beta: inst.beta,
                d_max: inst.d_max,
            });
        }
    }

    let report = bound_vs_empirical(&measurements, FRONTIER_MARGIN_TOL);
    for (row, (_, outcome)) in rows.iter_mut().zip(&report.entries) {
        match outcome {
            InstanceOutcome::Included { bound, c, k, margin, consistent } => {
                row.lemma1_bound = Some(*bound);
                row.lemma1_c = Some(*c);
                row.lemma1_k = Some(*k);
                row.margin = Some(*margin);
                row.consistent = Some(*consistent);
            }
            InstanceOutcome::Excluded { reason } => {
                row.excluded_reason = Some(reason.describe());
            }
        }
    }
    Ok((rows, report))
}

fn run_dp_audit(
    scenario: &Scenario,
    graph: &ContactGraph,
    utility: UtilityKind,
    recommender: RecommenderKind,
    eps_claim: f64,
) -> anyhow::Result<(Vec<DpAuditRow>, DpAuditReport)> {
    let report = dp_audit(
        |g| recommender.recommend(&structural_utility(g, utility)?),
        graph,
        eps_claim,
    )?;
    let row = DpAuditRow {
        scenario_id: scenario.id.clone(),
        master_seed: scenario.master_seed,
        utility: utility.name(),
        recommender: recommender.name(),
        eps_claim,
        max_ratio: report.max_ratio,
        unbounded: report.unbounded,
        pass: report.pass,
        neighbors_checked: report.neighbors_checked,
        worst_edge_a: report.witness.map(|w| w.edge.0 as u64),
        worst_edge_b: report.witness.map(|w| w.edge.1 as u64),
        worst_node: report.witness.map(|w| w.node as u64),
    };
    Ok((vec![row], report))
}

fn run_bounds(scenario: &Scenario, requests: &[BoundRequest]) -> anyhow::Result<Vec<BoundsRow>> {
    requests
        .iter()
        .map(|req| -> anyhow::Result<BoundsRow> {
            let base = BoundsRow {
                scenario_id: scenario.id.clone(),
                master_seed: scenario.master_seed,
                kind: "",
                t: None,
                c: None,
                delta: None,
                n: None,
                k: None,
                beta: None,
                d_max: None,
                log_base: None,
                f: None,
                value: 0.0,
                vacuous: false,
                leaked: None,
            };
            Ok(match *req {
                BoundRequest::Lemma1 { t, c, delta, n, k } => {
                    let value = enlab_core::bounds::lemma1_eps_lower(t, c, delta, n, k)?;
                    BoundsRow {
                        kind: "lemma1",
                        t: Some(t as u64),
                        c: Some(c),
                        delta: Some(delta),
                        n: Some(n),
                        k: Some(k),
                        value,
                        vacuous: value <= 0.0,
                        ..base
                    }
                }
                BoundRequest::Theorem4 { n, beta, d_max, log_base } => {
                    let value = enlab_core::bounds::theorem4_eps_lower(n, beta, d_max, log_base)?;
                    BoundsRow {
                        kind: "theorem4",
                        n: Some(n),
                        beta: Some(beta),
                        d_max: Some(d_max),
                        log_base: Some(log_base.label()),
                        value,
                        vacuous: value <= 0.0,
                        ..base
                    }
                }
                BoundRequest::Reconstruction { n, f } => {
                    let value = enlab_core::bounds::reconstruction_error_bound(f)?;
                    let leaked = enlab_core::bounds::leaked_count(n, f)?;
                    BoundsRow {
                        kind: "reconstruction",
                        n: Some(n),
                        f: Some(f),
                        value,
                        vacuous: value >= n as f64,
                        leaked: Some(leaked),
                        ..base
                    }
                }
            })
        })
        .collect()
}

/// Evaluates a bounds request into the serializable record form.
pub fn evaluate_bound(req: &BoundRequest) -> anyhow::Result<TradeoffBound> {
    Ok(match *req {
        BoundRequest::Lemma1 { t, c, delta, n, k } => TradeoffBound::lemma1(t, c, delta, n, k)?,
        BoundRequest::Theorem4 { n, beta, d_max, log_base } => {
            TradeoffBound::theorem4(n, beta, d_max, log_base)?
        }
        BoundRequest::Reconstruction { n, f } => TradeoffBound::reconstruction(n, f)?,
    })
}

/// Paths produced by a completed run.
pub struct RunArtifacts {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub rows_json_path: Option<PathBuf>,
    pub row_count: usize,
    pub summary: serde_json::Value,
}

/// Runs a scenario and persists artifacts under `out_dir`: `<id>.csv`, a
/// `<id>.summary.json`, and (for JSON format) `<id>.rows.json`. A
/// `<id>.partial` marker lives for the duration of the run; it disappears on
/// success and stays behind on failure.
pub fn run_to_files(
    scenario: &Scenario,
    out_dir: &Path,
    format: OutputFormat,
) -> anyhow::Result<RunArtifacts> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let partial_path = out_dir.join(format!("{}.partial", scenario.id));
    std::fs::write(&partial_path, b"run in progress\n")?;

    let started = Instant::now();
    let output = execute(scenario)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    let csv_path = out_dir.join(format!("{}.csv", scenario.id));
    std::fs::write(&csv_path, output.csv_bytes())?;

    let rows_json_path = if format == OutputFormat::Json {
        let p = out_dir.join(format!("{}.rows.json", scenario.id));
        std::fs::write(&p, serde_json::to_vec_pretty(&output.rows_json())?)?;
        Some(p)
    } else {
        None
    };

    let summary = summarize(scenario, &output, elapsed_ms);
    let summary_path = out_dir.join(format!("{}.summary.json", scenario.id));
    std::fs::write(&summary_path, serde_json::to_vec_pretty(&summary)?)?;

    std::fs::remove_file(&partial_path)?;
    Ok(RunArtifacts {
        csv_path,
        summary_path,
        rows_json_path,
        row_count: output.row_count(),
        summary,
    })
}

fn summarize(scenario: &Scenario, output: &RunOutput, elapsed_ms: f64) -> serde_json::Value {
    let specifics = match output {
        RunOutput::Reconstruct(rows) => {
            let distances: Vec<usize> = rows.iter().map(|r| r.distance).collect();
            json!({
                "mean_distance": mean(&distances),
                "max_distance": distances.iter().max().copied().unwrap_or(0),
                "total_queries": rows.iter().map(|r| r.queries_used).sum::<u64>(),
            })
        }
        RunOutput::NoiseSweep(rows) => {
            let mut per_f = Vec::new();
            let mut fs: Vec<f64> = rows.iter().map(|r| r.f).collect();
            fs.dedup();
            for f in fs {
                let d: Vec<usize> =
                    rows.iter().filter(|r| r.f == f).map(|r| r.distance).collect();
                per_f.push(json!({
                    "f": f,
                    "trials": d.len(),
                    "mean_distance": mean(&d),
                    "max_distance": d.iter().max().copied().unwrap_or(0),
                }));
            }
            json!({
                "per_f": per_f,
                "all_within_bound": rows.iter().all(|r| r.within_bound),
            })
        }
        RunOutput::Frontier { rows, report } => {
            let margins: Vec<f64> =
                report.included().map(|(_, margin, _)| margin).collect();
            json!({
                "included": margins.len(),
                "excluded": rows.len() - margins.len(),
                "all_consistent": report.all_consistent(),
                "min_margin": margins.iter().copied().fold(f64::INFINITY, f64::min),
            })
        }
        RunOutput::DpAudit { report, .. } => json!({
            "pass": report.pass,
            "max_ratio": report.max_ratio,
            "unbounded": report.unbounded,
            "report": report,
        }),
        RunOutput::Bounds(rows) => json!({
            "values": rows.iter().map(|r| json!({"kind": r.kind, "value": r.value})).collect::<Vec<_>>(),
        }),
    };
    json!({
        "schema": scenario.schema,
        "id": scenario.id,
        "kind": scenario.experiment.kind_name(),
        "master_seed": scenario.master_seed,
        "trials": scenario.trials,
        "rows": output.row_count(),
        "elapsed_ms": elapsed_ms,
        "results": specifics,
    })
}

fn mean(values: &[usize]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<usize>() as f64 / values.len() as f64
}

/// Loads, validates, and runs a scenario file.
pub fn run_scenario_file(
    path: &Path,
    out_dir: &Path,
    format: OutputFormat,
) -> anyhow::Result<RunArtifacts> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario file {}", path.display()))?;
    let scenario = Scenario::from_json(&text).map_err(|e| anyhow!(e))?;
    run_to_files(&scenario, out_dir, format)
}
