use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed model file, unphysical input or a failed invariant check.
    #[error("{0}")]
    Validation(String),

    #[error("solvers disagree: {what} = {value:.3e} exceeds {limit:.3e}; worst at t = {time}")]
    Disagreement {
        what: String,
        value: f64,
        limit: f64,
        time: f64,
    },

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Disagreement { .. } => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<qcascade_core::Error> for CliError {
    fn from(e: qcascade_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
