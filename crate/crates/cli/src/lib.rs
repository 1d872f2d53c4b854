//! Command-line front end: suite grids, config loading, output writers and
//! the reproduction checks.

pub mod acceptance;
pub mod config;
pub mod emit;
pub mod suite;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{load_config, Format, Mode, OutputSpec, Settings, Suite, SuiteSpec};
pub use emit::{emit, format_number, render, CSV_HEADER};
pub use suite::{run_suite, ResultRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tpm_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} acceptance check(s) failed")]
    CheckFailed(usize),
}

impl CliError {
    /// 1 usage/config, 2 runtime/IO, 3 failed acceptance check.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Core(_) | CliError::Io { .. } => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}
