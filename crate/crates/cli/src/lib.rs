//! Scenario files and the four run modes behind the `spectral-flrw` binary.

pub mod config;
pub mod run;

pub use config::{expand_sweep, parse_config, Mode, Overrides, Scenario, SweepPoint, CONFIG_KEYS};
pub use run::{run_scenario, Outcome};

use spectral_flrw::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or incomplete scenario; exit status 2.
    #[error("configuration error: {0}")]
    Config(String),

    /// The run itself failed; exit status 1.
    #[error("{0}")]
    Run(String),

    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::InconsistentParams(_) | Error::InvalidConfig(_) | Error::TooFewNodes { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Run(e.to_string()),
        }
    }
}
