//! `enlab` — reproducible privacy/accuracy experiments over noisy
//! exposure-notification oracles and contact graphs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use enlab_cli::runner::{evaluate_bound, run_scenario_file, run_to_files, OutputFormat};
use enlab_cli::scenario::{
    AttackSpec, BoundRequest, ExperimentSpec, GraphSource, Scenario, ValidationError,
    SCHEMA_VERSION,
};
use enlab_core::bounds::LogBase;
use enlab_core::graph::{ContactLog, GraphSpec, RecommenderKind, UtilityKind};
use enlab_core::oracle::NoiseMechanism;

#[derive(Parser)]
#[command(
    name = "enlab",
    about = "Privacy/accuracy trade-off lab for noisy exposure notification",
    version
)]
struct Cli {
    /// Master seed all per-trial randomness derives from.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output directory for CSV / JSON artifacts.
    #[arg(long, global = true, default_value = "enlab-out")]
    out: PathBuf,

    /// Row artifact format: csv only, or csv plus a rows.json file.
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,

    /// Scenario id; defaults to the subcommand name.
    #[arg(long, global = true)]
    id: Option<String>,

    #[command(subcommand)]
    command: Command,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("format must be csv or json, got {other:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one reconstruction attack over fresh seeded oracles.
    Reconstruct(ReconstructArgs),
    /// Brute-force reconstruction across a grid of noise bounds.
    SweepNoise(SweepNoiseArgs),
    /// Exponential-mechanism privacy/accuracy frontier with analytic bounds.
    Frontier(FrontierArgs),
    /// Exhaustive edge-DP audit of one recommender on one graph.
    DpAudit(DpAuditArgs),
    /// Evaluate closed-form bounds; prints JSON records.
    Bounds(BoundsArgs),
    /// Run a scenario file.
    Run { scenario: PathBuf },
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    prevalence: f64,
    /// Mechanism kind: exact | bounded-uniform | rounding | laplace.
    #[arg(long, default_value = "exact")]
    mechanism: String,
    /// Perturbation bound f (bounded-uniform).
    #[arg(long)]
    f: Option<f64>,
    /// Rounding granularity m.
    #[arg(long)]
    m: Option<f64>,
    /// Laplace scale b.
    #[arg(long)]
    b: Option<f64>,
    /// Attack: brute-force | relax-and-round | adaptive-split | split-blocks.
    #[arg(long, default_value = "brute-force")]
    attack: String,
    /// Consistency-check bound for brute-force / split-blocks; defaults to
    /// the mechanism's f (bounded-uniform) or 0.5 (exact).
    #[arg(long)]
    check_f: Option<f64>,
    #[arg(long)]
    num_queries: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
}

#[derive(Args)]
struct SweepNoiseArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    prevalence: f64,
    /// Comma-separated f grid, e.g. "0.5,1,2,3".
    #[arg(long, value_delimiter = ',')]
    f_grid: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
}

#[derive(Args)]
struct FrontierArgs {
    /// Node count of the built-in star family (target 0, j = 0..n−1 direct
    /// edges).
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value = "direct-edge")]
    utility: String,
    #[arg(long, default_value_t = 1.0)]
    sensitivity: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2,5")]
    eps_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8")]
    c_grid: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    beta_fraction: f64,
    /// Log base for the degree-parameterized bound: e | 2 | 10.
    #[arg(long, default_value = "e")]
    log_base: String,
}

#[derive(Args)]
struct DpAuditArgs {
    /// Edge-list graph JSON file ({"n", "target", "edges"}).
    #[arg(long, conflicts_with = "contact_log")]
    graph: Option<PathBuf>,
    /// Contact/report log JSON file to run through edge construction.
    #[arg(long)]
    contact_log: Option<PathBuf>,
    #[arg(long, default_value = "direct-edge")]
    utility: String,
    /// Recommender: exponential | r-best | uniform.
    #[arg(long, default_value = "exponential")]
    recommender: String,
    #[arg(long, default_value_t = 1.0)]
    eps_param: f64,
    #[arg(long, default_value_t = 1.0)]
    sensitivity: f64,
    #[arg(long)]
    eps_claim: f64,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(subcommand)]
    which: BoundCommand,
}

#[derive(Subcommand)]
enum BoundCommand {
    /// (1/t)[ln((c−δ)/δ) + ln((n−k)/k)]
    Lemma1 {
        #[arg(long)]
        t: u32,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
    },
    /// (log n − log β − log log n)/(4·d_max)
    Theorem4 {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        beta: u64,
        #[arg(long)]
        d_max: u64,
        #[arg(long, default_value = "e")]
        log_base: String,
    },
    /// Error bound 4f and the guaranteed leak count n − ⌈4f⌉.
    Reconstruction {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        f: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<ValidationError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let scenario = match &cli.command {
        Command::Run { scenario } => {
            let artifacts = run_scenario_file(scenario, &cli.out, cli.format)?;
            report(&artifacts);
            return Ok(());
        }
        Command::Reconstruct(args) => build_reconstruct(&cli, args)?,
        Command::SweepNoise(args) => Scenario {
            schema: SCHEMA_VERSION,
            id: cli.id.clone().unwrap_or_else(|| "sweep-noise".into()),
            master_seed: cli.seed,
            trials: args.trials,
            experiment: ExperimentSpec::NoiseSweep {
                n: args.n,
                prevalence: args.prevalence,
                f_grid: args.f_grid.clone(),
            },
        },
        Command::Frontier(args) => Scenario {
            schema: SCHEMA_VERSION,
            id: cli.id.clone().unwrap_or_else(|| "frontier".into()),
            master_seed: cli.seed,
            trials: 1,
            experiment: ExperimentSpec::Frontier {
                utility: args.utility.parse::<UtilityKind>()?,
                sensitivity: args.sensitivity,
                eps_grid: args.eps_grid.clone(),
                c_grid: args.c_grid.clone(),
                beta_fraction: args.beta_fraction,
                log_base: args.log_base.parse::<LogBase>()?,
                graphs: star_family(args.n),
            },
        },
        Command::DpAudit(args) => build_dp_audit(&cli, args)?,
        Command::Bounds(args) => {
            let request = match &args.which {
                BoundCommand::Lemma1 { t, c, delta, n, k } => BoundRequest::Lemma1 {
                    t: *t,
                    c: *c,
                    delta: *delta,
                    n: *n,
                    k: *k,
                },
                BoundCommand::Theorem4 { n, beta, d_max, log_base } => BoundRequest::Theorem4 {
                    n: *n,
                    beta: *beta,
                    d_max: *d_max,
                    log_base: log_base.parse::<LogBase>()?,
                },
                BoundCommand::Reconstruction { n, f } => {
                    BoundRequest::Reconstruction { n: *n, f: *f }
                }
            };
            // parameters in, JSON record out
            println!("{}", serde_json::to_string_pretty(&evaluate_bound(&request)?)?);
            Scenario {
                schema: SCHEMA_VERSION,
                id: cli.id.clone().unwrap_or_else(|| "bounds".into()),
                master_seed: cli.seed,
                trials: 1,
                experiment: ExperimentSpec::Bounds { requests: vec![request] },
            }
        }
    };
    scenario.validate().map_err(anyhow::Error::new)?;
    let artifacts = run_to_files(&scenario, &cli.out, cli.format)?;
    report(&artifacts);
    Ok(())
}

fn report(artifacts: &enlab_cli::runner::RunArtifacts) {
    println!(
        "wrote {} rows to {}",
        artifacts.row_count,
        artifacts.csv_path.display()
    );
    if let Some(p) = &artifacts.rows_json_path {
        println!("row records: {}", p.display());
    }
    println!("summary: {}", artifacts.summary_path.display());
    if let Some(results) = artifacts.summary.get("results") {
        println!("results: {results}");
    }
}

fn build_reconstruct(cli: &Cli, args: &ReconstructArgs) -> anyhow::Result<Scenario> {
    let mechanism = match args.mechanism.as_str() {
        "exact" => NoiseMechanism::Exact,
        "bounded-uniform" => NoiseMechanism::BoundedUniform {
            f: args.f.ok_or_else(|| anyhow::anyhow!("bounded-uniform needs --f"))?,
        },
        "rounding" => NoiseMechanism::Rounding {
            m: args.m.ok_or_else(|| anyhow::anyhow!("rounding needs --m"))?,
        },
        "laplace" => NoiseMechanism::Laplace {
            b: args.b.ok_or_else(|| anyhow::anyhow!("laplace needs --b"))?,
        },
        other => anyhow::bail!("unknown mechanism {other:?}"),
    };
    let default_check_f = || match mechanism {
        NoiseMechanism::BoundedUniform { f } => Ok(f),
        NoiseMechanism::Exact => Ok(0.5),
        _ => Err(anyhow::anyhow!(
            "--check-f is required with the {} mechanism",
            mechanism.name()
        )),
    };
    let attack = match args.attack.as_str() {
        "brute-force" => AttackSpec::BruteForce {
            f: match args.check_f {
                Some(f) => f,
                None => default_check_f()?,
            },
        },
        "relax-and-round" => AttackSpec::RelaxAndRound {
            num_queries: args
                .num_queries
                .ok_or_else(|| anyhow::anyhow!("relax-and-round needs --num-queries"))?,
            max_iters: args.max_iters,
            tol: args.tol,
        },
        "adaptive-split" => AttackSpec::AdaptiveSplit,
        "split-blocks" => AttackSpec::SplitBlocks {
            f: match args.check_f {
                Some(f) => f,
                None => default_check_f()?,
            },
            block_size: args
                .block_size
                .ok_or_else(|| anyhow::anyhow!("split-blocks needs --block-size"))?,
        },
        other => anyhow::bail!("unknown attack {other:?}"),
    };
    Ok(Scenario {
        schema: SCHEMA_VERSION,
        id: cli.id.clone().unwrap_or_else(|| "reconstruct".into()),
        master_seed: cli.seed,
        trials: args.trials,
        experiment: ExperimentSpec::Reconstruct {
            n: args.n,
            prevalence: args.prevalence,
            mechanism,
            attack,
        },
    })
}

fn build_dp_audit(cli: &Cli, args: &DpAuditArgs) -> anyhow::Result<Scenario> {
    let graph = if let Some(path) = &args.graph {
        let text = std::fs::read_to_string(path)?;
        GraphSource::Spec(serde_json::from_str::<GraphSpec>(&text)?)
    } else if let Some(path) = &args.contact_log {
        let text = std::fs::read_to_string(path)?;
        GraphSource::Log(serde_json::from_str::<ContactLog>(&text)?)
    } else {
        anyhow::bail!("dp-audit needs --graph or --contact-log");
    };
    let recommender = match args.recommender.as_str() {
        "exponential" => RecommenderKind::Exponential {
            eps_param: args.eps_param,
            sensitivity: args.sensitivity,
        },
        "r-best" => RecommenderKind::RBest,
        "uniform" => RecommenderKind::Uniform,
        other => anyhow::bail!("unknown recommender {other:?}"),
    };
    Ok(Scenario {
        schema: SCHEMA_VERSION,
        id: cli.id.clone().unwrap_or_else(|| "dp-audit".into()),
        master_seed: cli.seed,
        trials: 1,
        experiment: ExperimentSpec::DpAudit {
            graph,
            utility: args.utility.parse::<UtilityKind>()?,
            recommender,
            eps_claim: args.eps_claim,
        },
    })
}

/// Stars with 0..n−1 direct edges on n nodes: the default frontier family.
fn star_family(n: usize) -> Vec<GraphSpec> {
    (0..n)
        .map(|j| GraphSpec {
            n,
            target: 0,
            edges: (1..=j).map(|i| (0, i)).collect(),
        })
        .collect()
}
