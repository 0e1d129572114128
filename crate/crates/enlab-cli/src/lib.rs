//! Experiment harness: scenario files, deterministic result rows, runners.

pub mod rows;
pub mod runner;
pub mod scenario;

pub use runner::{execute, run_scenario_file, run_to_files, OutputFormat, RunOutput};
pub use scenario::{AttackSpec, BoundRequest, ExperimentSpec, GraphSource, Scenario};
