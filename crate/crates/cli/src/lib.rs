//! Batch front end for the `hetnet-coop` engines: parameter sweeps written as
//! CSV and a cross-engine validation report.

pub mod app;
pub mod output;
pub mod sweep;
pub mod validate;

pub use app::{run, Cli, Command};
pub use sweep::{run_sweep, Engine, Metric, Row, SweepSpec, Variable};
pub use validate::{validate, Check, Report, ValidateOptions};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Engine(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for configuration problems, 1 for anything that failed mid-run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
