//! Experiment runner behind the `simcorr` binary.

pub mod config;
pub mod experiment;

use simcorr::SisError;
use thiserror::Error;

pub use config::{ExperimentConfig, ModelKind, ModelSpec};
pub use experiment::{
    compare_gold, enumerate, run_experiment, simulate_truth, validate_feed, Artifacts, FeedReport,
};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Collapse(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Collapse(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<SisError> for CliError {
    fn from(e: SisError) -> Self {
        match e {
            SisError::ParticleCollapse { .. } => CliError::Collapse(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
