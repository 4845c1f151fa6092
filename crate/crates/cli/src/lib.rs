//! Library side of the `qconv` command: channel ingestion, grid evaluation
//! and table emission.

pub mod channel_file;
pub mod config;
pub mod output;
pub mod run;

pub use channel_file::{channel_to_json, parse_channel, Representation};
pub use config::RunConfig;
pub use output::{format_number, parse_bound_csv, Table};
pub use run::{execute, run};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 2 for invalid input, 3 for solver failure, 1 for output errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<qconv_core::Error> for CliError {
    fn from(e: qconv_core::Error) -> Self {
        match e {
            qconv_core::Error::Solver { .. } => CliError::Solver(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
