//! Counterfactual generation.
//!
//! [`generate`] picks an optimizer for a trained model: projected gradient
//! descent for a single counterfactual of a logistic model, otherwise the
//! model-agnostic evolutionary search over k-sets.

mod classifier;
mod distance;
mod dpp;
mod error;
mod evolutionary;
mod gradient;
mod loss;
mod objective;
mod query;
mod sparsity;

pub use classifier::{Classifier, SchemaModel};
pub use distance::{distance, DistanceMode, Metric};
pub use dpp::{determinant, dpp_diversity, kernel_matrix};
pub use error::CfError;
pub use evolutionary::{generate_diverse_cfs, POPULATION_SIZE, STAGNATION_LIMIT};
pub use gradient::{generate_single_cf, RelaxedObjective, GRADIENT_PATIENCE, GRADIENT_STEP};
pub use loss::hinge_loss;
pub use objective::{dice_objective, objective_from_terms, ObjectiveTerms};
pub use query::{
    CfQuery, Counterfactual, CounterfactualSet, DiffEntry, Optimizer, DEFAULT_BUDGET,
    DEFAULT_LAMBDA1, DEFAULT_LAMBDA2,
};
pub use sparsity::sparsity_pass;

pub(crate) use query::Prepared;

use crate::models::TrainedModel;
use crate::tabular::FeatureSchema;

/// The optimizer [`generate`] will use for `query` on `model`.
pub fn resolve_optimizer(query: &CfQuery, model: &TrainedModel) -> Optimizer {
    query.optimizer.unwrap_or(if model.as_logistic().is_some() && query.k == 1 {
        Optimizer::Gradient
    } else {
        Optimizer::Evolutionary
    })
}

pub fn generate(
    query: &CfQuery,
    model: &TrainedModel,
    schema: &FeatureSchema,
    mads: &[f64],
) -> Result<CounterfactualSet, CfError> {
    match resolve_optimizer(query, model) {
        Optimizer::Gradient => {
            let logistic = model
                .as_logistic()
                .ok_or(CfError::UnsupportedOptimizer("gradient"))?;
            generate_single_cf(query, logistic, schema, mads)
        }
        Optimizer::Evolutionary => {
            let classifier = SchemaModel::new(model, schema).ok_or_else(|| {
                CfError::InvalidQuery(format!(
                    "model expects {} encoded inputs, schema encodes to {}",
                    model.input_width(),
                    schema.encoded_width()
                ))
            })?;
            generate_diverse_cfs(query, &classifier, schema, mads)
        }
    }
}
