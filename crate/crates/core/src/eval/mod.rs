//! Confusion matrices, P/R/F1 aggregation, multi-seed summaries and boxplots.

mod boxplot;
mod metrics;
mod runs;

use thiserror::Error;

pub use boxplot::{boxplot_stats, quantile_sorted, BoxplotStats, FENCE_FACTOR};
pub use metrics::{aggregate, confusion, prf, ClassMetrics, ConfusionMatrix, MetricsReport, Prf};
pub use runs::{boxplot_csv, report_csv, summarize_runs, RunSetReport, SeedMetrics};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{preds} predictions vs {golds} gold labels")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("class {class} outside [0, {classes})")]
    ClassOutOfRange { class: usize, classes: usize },
    #[error("confusion matrix has {matrix} classes, label set has {labels}")]
    ClassCountMismatch { matrix: usize, labels: usize },
    #[error("no values to summarize")]
    EmptyInput,
    #[error("NaN in input")]
    NonFinite,
}
