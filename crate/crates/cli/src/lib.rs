//! Model files, solver runs and CSV output for the `qcascade` binary.

pub mod error;
pub mod model_file;
pub mod run;

pub use error::{CliError, CliResult};
pub use model_file::{parse_builtin, parse_model, ParseError};
pub use run::{load_model, RunConfig, Solver};
