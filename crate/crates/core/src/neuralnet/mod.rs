//! CNN relation classifier with manual backpropagation, Adam, and gradient checks.

pub mod adam;
pub mod checkpoint;
pub mod cnn;
pub mod gradcheck;
pub mod network;
pub mod params;
pub mod train;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use cnn::{forward, CnnConfig, Mode};
pub use gradcheck::{gradcheck, gradcheck_full_cnn, gradcheck_linear_toy, GradcheckReport};
pub use network::{argmax, Network};
pub use params::ParamStore;
pub use train::{evaluate, history_csv, train, EpochRecord, TrainConfig, TrainOutcome};

use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::representations::ReprError;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("input matrix is {found:?}, network expects {expected:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("empty batch")]
    EmptyBatch,
    #[error("class {class} outside [0, {classes})")]
    ClassOutOfRange { class: usize, classes: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
