use thiserror::Error;

/// Errors raised across the library. Each variant maps to one failure class
/// so callers (and the CLI's exit codes) can tell contract violations apart
/// from numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} {requested} exceeds capacity {available}")]
    Capacity {
        what: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive definite: pivot {pivot} has value {value}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e}: estimate {estimate}, error bound {error:e}")]
    Tolerance {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("work budget exceeded: {required} cell-point tests, budget {budget}")]
    WorkBudget { required: u128, budget: u128 },

    #[error("infeasible growth regime: max A = {0} >= 1, the bound on |g| is not integrable")]
    Infeasible(f64),

    #[error("insufficient data: {usable} usable records, need at least {needed}")]
    InsufficientData { usable: usize, needed: usize },

    #[error("integrand returned {value} at {point:?}")]
    NonFinite { value: f64, point: Vec<f64> },

    #[error("no reference value available: {0}")]
    OracleUnavailable(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
