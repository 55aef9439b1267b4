//! Named experiments, their configuration and output tables, and the
//! acceptance suite.

pub mod acceptance;
pub mod config;
mod experiments;
mod table;

use std::path::PathBuf;

pub use config::{parse_grid, Ensemble, Experiment, ExperimentConfig, Format, OutputSpec, Parameters};
pub use experiments::{factor_seed, loss_over_grid, nondecreasing_flags, run_experiment};
pub use table::{emit, metadata_path, Metadata, ResultTable};

use crate::Error;

/// Everything that can stop an experiment, with its CLI exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("missing required flag {0}")]
    MissingFlag(&'static str),

    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("table: {0}")]
    Table(String),

    #[error("{failed} acceptance criteria failed")]
    Acceptance { failed: usize },
}

impl HarnessError {
    /// 1 for validation problems, 2 for numeric failures, 3 for failed acceptance.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::MissingFlag(_) | Self::Io { .. } => 1,
            Self::Numeric { source, .. } => match source {
                Error::Domain { .. } | Error::Dimension(_) => 1,
                _ => 2,
            },
            Self::Table(_) => 2,
            Self::Acceptance { .. } => 3,
        }
    }
}
