use thiserror::Error;

use crate::types::Norm;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("abstention encountered but the deviation function has no abstain value")]
    AbstainUnconfigured,

    #[error("exact test not supported for the {0} norm")]
    UnsupportedNorm(Norm),

    #[error("region is empty")]
    EmptyRegion,

    #[error("no leaf combination meets the certification set")]
    EmptyCertSet,

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("unsupported rule condition: {0}")]
    UnsupportedCondition(String),

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("budget of {budget} queries is smaller than the {cells} partition cells")]
    BudgetTooSmall { budget: usize, cells: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("missing normalization stats: {0}")]
    MissingStats(String),

    #[error("unsupported model pair: {0}")]
    UnsupportedPair(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
