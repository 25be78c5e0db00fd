use thiserror::Error;

use crate::tabular::TabularError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CfError {
    #[error("distance part `{part}` has no features but weight {weight} was requested")]
    ModeMismatch { part: &'static str, weight: f64 },

    #[error("no counterfactual found after {evaluations} model evaluations")]
    NoCounterfactualFound { evaluations: usize },

    #[error("origin is already predicted as target class {class}")]
    TargetEqualsPrediction { class: u8 },

    #[error("optimizer `{0}` is not available for this model or query")]
    UnsupportedOptimizer(&'static str),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(#[from] TabularError),
}

impl CfError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            CfError::ModeMismatch { .. } => "ModeMismatch",
            CfError::NoCounterfactualFound { .. } => "NoCounterfactualFound",
            CfError::TargetEqualsPrediction { .. } => "TargetEqualsPrediction",
            CfError::UnsupportedOptimizer(_) => "UnsupportedOptimizer",
            CfError::InvalidQuery(_) => "InvalidQuery",
            CfError::InvalidInstance(_) => "InvalidInstance",
        }
    }
}
