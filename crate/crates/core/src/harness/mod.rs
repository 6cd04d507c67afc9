//! Command-line harness: dataset prep, single runs, seeded sweeps, gradient checks, reports.

pub mod commands;
pub mod config;
pub mod pipeline;

use std::path::Path;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::neuralnet::NetError;
use crate::representations::ReprError;

pub use commands::{cmd_bench, cmd_gradcheck, cmd_prep, cmd_report, cmd_train, BenchManifest, BenchReport, RunMetrics};
pub use config::{ChannelSpec, RunConfig, StackSpec};
pub use pipeline::{RunOutput, Workspace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("writing {path}: {source}")]
    Output { path: String, source: std::io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("sweep aborted: {0}")]
    Aborted(String),
    #[error("gradient check failed: max relative error {error:e} >= tolerance {tolerance:e}")]
    GradcheckFailed { error: f64, tolerance: f64 },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }

    pub(crate) fn output(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Output { path: path.display().to_string(), source }
    }

    /// 2 for bad inputs (config, corpus, sidecars), 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } | HarnessError::Corpus(_) | HarnessError::Repr(_) => EXIT_INPUT,
            HarnessError::Net(NetError::Corpus(_) | NetError::Repr(_) | NetError::InvalidConfig(_)) => EXIT_INPUT,
            _ => EXIT_INTERNAL,
        }
    }
}
