//! Runner-level behavior of each experiment kind, via the library API.

use enlab_cli::runner::{execute, run_to_files, OutputFormat, RunOutput};
use enlab_cli::scenario::{AttackSpec, ExperimentSpec, Scenario, SCHEMA_VERSION};
use enlab_core::bounds::LogBase;
use enlab_core::graph::{GraphSpec, UtilityKind};
use enlab_core::oracle::NoiseMechanism;

fn scenario(id: &str, trials: u64, experiment: ExperimentSpec) -> Scenario {
    let s = Scenario {
        schema: SCHEMA_VERSION,
        id: id.into(),
        master_seed: 42,
        trials,
        experiment,
    };
    s.validate().unwrap();
    s
}

fn star_family(n: usize) -> Vec<GraphSpec> {
    (0..n)
        .map(|j| GraphSpec { n, target: 0, edges: (1..=j).map(|i| (0, i)).collect() })
        .collect()
}

fn frontier_spec(eps_grid: Vec<f64>) -> ExperimentSpec {
    ExperimentSpec::Frontier {
        utility: UtilityKind::DirectEdge,
        sensitivity: 1.0,
        eps_grid,
        c_grid: (1..=8).map(|i| i as f64 / 10.0).collect(),
        beta_fraction: 0.5,
        log_base: LogBase::E,
        graphs: star_family(5),
    }
}

#[test]
fn frontier_accuracy_increases_with_eps_param() {
    let s = scenario("fr", 1, frontier_spec(vec![0.1, 0.5, 1.0, 2.0, 5.0]));
    let RunOutput::Frontier { rows, .. } = execute(&s).unwrap() else {
        panic!("wrong output kind")
    };
    // one accuracy value per eps point (constant across that point's rows)
    let mut accuracies = Vec::new();
    for row in &rows {
        if accuracies.last().map(|&(e, _)| e) != Some(row.eps_param) {
            accuracies.push((row.eps_param, row.accuracy));
        }
    }
    assert_eq!(accuracies.len(), 5);
    for pair in accuracies.windows(2) {
        assert!(
            pair[1].1 > pair[0].1,
            "accuracy must increase strictly: {:?}",
            accuracies
        );
    }
}

#[test]
fn frontier_eps_measured_never_exceeds_the_privacy_parameter() {
    let s = scenario("fr", 1, frontier_spec(vec![0.1, 0.5, 1.0, 2.0, 5.0]));
    let RunOutput::Frontier { rows, .. } = execute(&s).unwrap() else {
        panic!("wrong output kind")
    };
    for row in &rows {
        assert!(!row.unbounded);
        assert!(
            row.eps_measured <= row.eps_param + 1e-9,
            "measured {} > eps_param {}",
            row.eps_measured,
            row.eps_param
        );
    }
}

#[test]
fn frontier_small_eps_endpoint_approaches_uniform_accuracy() {
    let s = scenario("fr", 1, frontier_spec(vec![0.01]));
    let RunOutput::Frontier { rows, .. } = execute(&s).unwrap() else {
        panic!("wrong output kind")
    };
    let uniform = 1.0 / 4.0; // n − 1 candidates
    assert!((rows[0].accuracy - uniform).abs() < 1e-3);
}

#[test]
fn empty_f_grid_sweeps_to_zero_rows() {
    let s = scenario(
        "empty",
        10,
        ExperimentSpec::NoiseSweep { n: 8, prevalence: 0.5, f_grid: vec![] },
    );
    let RunOutput::NoiseSweep(rows) = execute(&s).unwrap() else {
        panic!("wrong output kind")
    };
    assert!(rows.is_empty());
}

#[test]
fn noise_sweep_rows_all_carry_the_guarantee() {
    let s = scenario(
        "sw",
        10,
        ExperimentSpec::NoiseSweep { n: 10, prevalence: 0.5, f_grid: vec![0.5, 2.0] },
    );
    let RunOutput::NoiseSweep(rows) = execute(&s).unwrap() else {
        panic!("wrong output kind")
    };
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.within_bound));
    // f = 0.5 cannot tolerate any wrong bit: exact recovery
    assert!(rows.iter().filter(|r| r.f == 0.5).all(|r| r.distance == 0));
}

#[test]
fn relax_attack_runs_through_the_harness() {
    let s = scenario(
        "rx",
        3,
        ExperimentSpec::Reconstruct {
            n: 30,
            prevalence: 0.3,
            mechanism: NoiseMechanism::Exact,
            attack: AttackSpec::RelaxAndRound { num_queries: 300, max_iters: 2000, tol: 1e-10 },
        },
    );
    let RunOutput::Reconstruct(rows) = execute(&s).unwrap() else {
        panic!("wrong output kind")
    };
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert_eq!(row.distance, 0, "exact oracle with 10n queries must recover");
        assert_eq!(row.queries_used, 300);
        assert_eq!(row.converged, Some(true));
    }
}

#[test]
fn library_rerun_is_byte_identical_for_every_kind() {
    let scenarios = vec![
        scenario(
            "d1",
            5,
            ExperimentSpec::NoiseSweep { n: 9, prevalence: 0.4, f_grid: vec![1.0] },
        ),
        scenario("d2", 1, frontier_spec(vec![0.5, 2.0])),
        scenario(
            "d3",
            4,
            ExperimentSpec::Reconstruct {
                n: 10,
                prevalence: 0.5,
                mechanism: NoiseMechanism::BoundedUniform { f: 1.0 },
                attack: AttackSpec::BruteForce { f: 1.0 },
            },
        ),
    ];
    for s in scenarios {
        let a = execute(&s).unwrap().csv_bytes();
        let b = execute(&s).unwrap().csv_bytes();
        assert_eq!(a, b, "scenario {} not deterministic", s.id);
    }
}

#[test]
fn shipped_scenarios_validate_and_the_small_ones_run() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        seen += 1;
        let text = std::fs::read_to_string(&path).unwrap();
        let s = Scenario::from_json(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        match &s.experiment {
            ExperimentSpec::Bounds { .. } | ExperimentSpec::Frontier { .. } => {
                let out = execute(&s).unwrap();
                assert!(out.row_count() > 0, "{} produced no rows", path.display());
            }
            // the full sweep: 4 f-values × 100 trials, no 4f violations
            ExperimentSpec::NoiseSweep { f_grid, .. } => {
                let expected = f_grid.len() as u64 * s.trials;
                let RunOutput::NoiseSweep(rows) = execute(&s).unwrap() else {
                    panic!("wrong output kind")
                };
                assert_eq!(rows.len() as u64, expected);
                assert!(rows.iter().all(|r| r.within_bound));
            }
            _ => {}
        }
    }
    assert!(seen >= 4, "expected shipped scenario files, found {seen}");
}

#[test]
fn artifacts_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(
        "files",
        2,
        ExperimentSpec::NoiseSweep { n: 8, prevalence: 0.5, f_grid: vec![1.0] },
    );
    let artifacts = run_to_files(&s, dir.path(), OutputFormat::Json).unwrap();
    assert_eq!(artifacts.row_count, 2);
    assert!(artifacts.csv_path.exists());
    assert!(artifacts.summary_path.exists());
    assert!(artifacts.rows_json_path.as_ref().unwrap().exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&artifacts.summary_path).unwrap()).unwrap();
    assert_eq!(summary["id"], "files");
    assert_eq!(summary["rows"], 2);
    assert_eq!(summary["results"]["all_within_bound"], true);
}
