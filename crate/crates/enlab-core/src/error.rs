use thiserror::Error;

/// Errors produced by databases, oracles, attacks, graph operations, and
/// bound calculators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("query budget exhausted (budget {budget}, answered {answered})")]
    BudgetExhausted { budget: u64, answered: u64 },

    /// The oracle's answers admit no consistent candidate, which is only
    /// possible when the mechanism broke its perturbation contract.
    #[error("mechanism violated its perturbation contract: {0}")]
    MechanismViolation(String),

    #[error("problem size over feasibility cap: {0}")]
    Scale(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("undefined concentration: total utility is zero")]
    UndefinedConcentration,

    #[error("undefined accuracy ratio: utility family contains an all-zero vector")]
    UndefinedRatio,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ingestion error: {0}")]
    Ingestion(String),
}

pub type Result<T> = std::result::Result<T, Error>;
