//! Quantifying privacy/accuracy trade-offs in noisy exposure notification.
//!
//! The crate has four parts:
//!
//! * [`db`] and [`oracle`] — binary infection-status databases, subset-sum
//!   queries, and noisy query oracles with strict perturbation contracts.
//! * [`attacks`] — database reconstruction against those oracles: exhaustive
//!   consistency search, a least-squares relaxation, zero-noise group
//!   testing, and the block-splitting variant.
//! * [`graph`] — contact graphs, structural alerting utilities, probabilistic
//!   recommenders, and an exhaustive edge differential privacy audit.
//! * [`bounds`] — closed-form ε lower bounds and reconstruction error bounds,
//!   plus the comparison of analytic bounds against audited measurements.
//!
//! Everything randomized takes an explicit 64-bit seed and replays
//! bit-identically; see [`seed`] for how experiment harnesses derive
//! per-trial streams.

pub mod attacks;
pub mod bounds;
pub mod db;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod seed;

pub use db::{random_database, BinaryDatabase, SubsetQuery};
pub use error::{Error, Result};
pub use oracle::{NoiseMechanism, NoisyOracle, OracleSpec};
