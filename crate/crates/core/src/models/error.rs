use thiserror::Error;

use super::MetricsReport;
use crate::tabular::TabularError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyTraining,

    #[error("loss became non-finite at epoch {epoch}")]
    DivergedTraining { epoch: usize },

    #[error("input has width {actual}, model expects {expected}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("{predictions} predictions but {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model was trained on schema {expected}, got {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("malformed model document: {0}")]
    Document(String),

    #[error(transparent)]
    Metrics(#[from] MetricsError),

    #[error(transparent)]
    Tabular(#[from] TabularError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("{predictions} predictions but {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },

    #[error("no samples to evaluate")]
    Empty,

    /// ROC-AUC is undefined with one label class; the remaining metrics are
    /// still computed and carried in `partial` (with `roc_auc = None`).
    #[error("labels contain a single class; ROC-AUC is undefined")]
    SingleClassLabels { partial: Box<MetricsReport> },
}
