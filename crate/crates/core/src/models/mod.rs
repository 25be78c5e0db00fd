//! From-scratch binary classifiers and their evaluation machinery.
//!
//! Models are trained and queried on one-hot encoded rows (see
//! [`crate::tabular::Encoder`]); [`TrainedModel`] is the closed set of model
//! kinds the rest of the crate serves.

mod cv;
mod error;
mod forest;
mod logistic;
mod metrics;
mod persist;
mod tree;

pub use cv::{cross_validate, CvReport, FoldReport, MeanMetrics};
pub use error::{MetricsError, ModelError};
pub use forest::{fit_random_forest, ForestModel, ForestParams};
pub use logistic::{
    fit_logistic_regression, loss_and_gradient, sigmoid, LogisticFit, LogisticModel,
    LogisticParams,
};
pub use metrics::{
    compute_metrics, confusion_matrix, metrics_from_confusion, predicted_class, roc_auc,
    Confusion, MetricsReport, DECISION_THRESHOLD,
};
pub use persist::ModelDocument;
pub use tree::{fit_decision_tree, DecisionTree, TreeNode, TreeParams};

use serde::{Deserialize, Serialize};

use crate::tabular::{Dataset, EncodedInstance, Encoder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Tree,
    Forest,
    Logistic,
}

impl std::str::FromStr for ModelKind {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tree" | "decision_tree" => Ok(ModelKind::Tree),
            "forest" | "random_forest" => Ok(ModelKind::Forest),
            "logistic" | "logistic_regression" => Ok(ModelKind::Logistic),
            other => Err(ModelError::InvalidParameter(format!(
                "unknown model kind `{other}`"
            ))),
        }
    }
}

/// Training configuration, tagged by `model_kind` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Tree(TreeParams),
    Forest(ForestParams),
    Logistic(LogisticParams),
}

impl ModelConfig {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Tree => ModelConfig::Tree(TreeParams {
                max_depth: 10,
                min_leaf: 2,
                feature_subsample: 1.0,
            }),
            ModelKind::Forest => ModelConfig::Forest(ForestParams::default()),
            ModelKind::Logistic => ModelConfig::Logistic(LogisticParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Tree(_) => ModelKind::Tree,
            ModelConfig::Forest(_) => ModelKind::Forest,
            ModelConfig::Logistic(_) => ModelKind::Logistic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind", content = "parameters", rename_all = "snake_case")]
pub enum TrainedModel {
    Tree(DecisionTree),
    Forest(ForestModel),
    Logistic(LogisticModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Tree(_) => ModelKind::Tree,
            TrainedModel::Forest(_) => ModelKind::Forest,
            TrainedModel::Logistic(_) => ModelKind::Logistic,
        }
    }

    pub fn input_width(&self) -> usize {
        match self {
            TrainedModel::Tree(t) => t.n_features,
            TrainedModel::Forest(f) => f.n_features,
            TrainedModel::Logistic(l) => l.weights.len(),
        }
    }

    /// Class-1 probability for an encoded row; the width is not checked.
    pub fn predict_bits(&self, bits: &[f64]) -> f64 {
        debug_assert_eq!(bits.len(), self.input_width());
        match self {
            TrainedModel::Tree(t) => t.predict(bits),
            TrainedModel::Forest(f) => f.predict(bits),
            TrainedModel::Logistic(l) => l.predict(bits),
        }
    }

    pub fn predict_proba(&self, instance: &EncodedInstance) -> Result<f64, ModelError> {
        if instance.bits.len() != self.input_width() {
            return Err(ModelError::WidthMismatch {
                expected: self.input_width(),
                actual: instance.bits.len(),
            });
        }
        Ok(self.predict_bits(&instance.bits))
    }

    pub fn as_logistic(&self) -> Option<&LogisticModel> {
        match self {
            TrainedModel::Logistic(l) => Some(l),
            _ => None,
        }
    }
}

pub fn encode_rows(dataset: &Dataset) -> Vec<Vec<f64>> {
    let encoder = Encoder::new(&dataset.schema);
    dataset
        .rows
        .iter()
        .map(|r| encoder.encode_values(r.values()))
        .collect()
}

/// Encodes `dataset` and fits the configured model.
pub fn train(config: &ModelConfig, dataset: &Dataset, seed: u64) -> Result<TrainedModel, ModelError> {
    let x = encode_rows(dataset);
    let y = &dataset.labels;
    Ok(match config {
        ModelConfig::Tree(p) => TrainedModel::Tree(fit_decision_tree(&x, y, p, seed)?),
        ModelConfig::Forest(p) => TrainedModel::Forest(fit_random_forest(&x, y, p, seed)?),
        ModelConfig::Logistic(p) => {
            TrainedModel::Logistic(fit_logistic_regression(&x, y, p, seed)?.model)
        }
    })
}

/// Class-1 probabilities for every row of `dataset`.
pub fn predict_dataset(model: &TrainedModel, dataset: &Dataset) -> Result<Vec<f64>, ModelError> {
    let encoder = Encoder::new(&dataset.schema);
    if encoder.width() != model.input_width() {
        return Err(ModelError::WidthMismatch {
            expected: model.input_width(),
            actual: encoder.width(),
        });
    }
    let mut buf = Vec::with_capacity(encoder.width());
    Ok(dataset
        .rows
        .iter()
        .map(|r| {
            encoder.encode_into(r.values(), &mut buf);
            model.predict_bits(&buf)
        })
        .collect())
}

/// Scores `model` on `dataset`. A single-class dataset yields the partial
/// report with `roc_auc = None`.
pub fn evaluate(model: &TrainedModel, dataset: &Dataset) -> Result<MetricsReport, ModelError> {
    let scores = predict_dataset(model, dataset)?;
    match compute_metrics(&scores, &dataset.labels, DECISION_THRESHOLD) {
        Ok(r) => Ok(r),
        Err(MetricsError::SingleClassLabels { partial }) => Ok(*partial),
        Err(e) => Err(e.into()),
    }
}
