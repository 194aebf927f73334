use std::fmt;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Clone)]
pub enum CliError {
    /// Malformed JSON.
    Parse { line: usize, column: usize, message: String },
    /// Well-formed input that violates a contract.
    Validation(String),
    Io(String),
    /// A computation that ran but could not produce a rate.
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { line, column, message } => {
                write!(f, "parse error at line {line}, column {column}: {message}")
            }
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Infeasible(m) => write!(f, "not computable: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<wtgf::Error> for CliError {
    fn from(e: wtgf::Error) -> Self {
        use wtgf::Error as E;
        match e {
            E::Infeasible(_) | E::BudgetExceeded { .. } | E::Refused(_) | E::HypothesisViolated { .. } => {
                CliError::Infeasible(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}
