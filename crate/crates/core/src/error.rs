use thiserror::Error;

use crate::channels::Witness;

/// Errors raised by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{what} sums to {sum} (tolerance {tolerance})")]
    NotNormalized { what: String, sum: f64, tolerance: f64 },

    #[error("negative mass {value} at flat index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("shape mismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("model error: {0}")]
    Model(String),

    #[error("hypothesis of {case} violated: {detail}")]
    HypothesisViolated {
        case: String,
        detail: String,
        witness: Option<Witness>,
    },

    #[error("scheme infeasible: {0}")]
    Infeasible(String),

    #[error("budget exceeded: {required} > {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;
