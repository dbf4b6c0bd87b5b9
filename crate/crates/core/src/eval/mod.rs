//! Metrics, rule-system quality analyses, and operation accounting.

mod analysis;
mod cost;
mod dataset;
mod metrics;

use thiserror::Error;

pub use analysis::{
    bottleneck_grid, confusion_pairs, coverage_completed, coverage_stats, happening_sets, is_consistent,
    BottleneckGrid, ConfusionReport, CoverageReport, PairCoverage,
};
pub use cost::{operation_count, OperationCount};
pub use dataset::{Dataset, DatasetRecord};
pub use metrics::{
    average_precision, map_of_predictions, mean_average_precision, top1_accuracy, top1_of_predictions, MetricReport,
};

use crate::graph::GraphError;
use crate::grounding::GroundingError;
use crate::inference::InferenceError;
use crate::text::TextError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("class {class:?}: {scores} scores but {labels} labels")]
    LengthMismatch { class: String, scores: usize, labels: usize },
    #[error("key mismatch: {0}")]
    KeyMismatch(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("image {0:?} has no score table")]
    MissingScoreTable(String),
    #[error("image {image:?} has no score for symbol {symbol:?}")]
    MissingScore { image: String, symbol: String },
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}
