//! Command-line pipeline over resurgo: spec ingestion, orchestration and
//! plot-ready export.

pub mod commands;
pub mod config;
pub mod spec_file;

pub use commands::{parse_spec, run, Outcome};
pub use config::{Args, RunConfig};
pub use spec_file::{SpecError, SpecFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 2 for unreadable input, 3 for numerical or output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}
