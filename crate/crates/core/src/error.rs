use thiserror::Error;

use crate::bg::BgReport;
use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Numerics(#[from] NumericsError),

    /// The Bobkov–Götze evaluation ran out of budget; the best report found so
    /// far is attached.
    #[error("evaluation budget exceeded: {reason}")]
    BudgetExceeded {
        reason: String,
        partial: Box<BgReport>,
    },

    /// A relaxation step in a recorded chain of inequalities decreased.
    #[error("inequality chain violated: {0}")]
    ChainViolation(String),

    #[error("degenerate test function: {0}")]
    DegenerateFunction(String),

    #[error("no valid candidate in parameter grid")]
    NoValidCandidate,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
