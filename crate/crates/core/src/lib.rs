//! Counterfactual explanations for tabular binary classifiers.
//!
//! The crate is organised in four layers:
//!
//! * [`tabular`]: feature schemas, datasets, one-hot encoding, robust
//!   statistics, SMOTE balancing, fold splitting and a synthetic data generator
//!   for ordinal symptom scales.
//! * [`models`]: decision tree, random forest and logistic regression
//!   classifiers together with metrics and k-fold cross-validation.
//! * [`cf`]: distances, hinge loss, determinantal diversity, the diverse
//!   counterfactual objective and its two optimizers (projected gradient for
//!   logistic models, evolutionary search for any model).
//! * [`importance`]: local and global feature importance derived from how
//!   often each feature changes across generated counterfactuals.

pub mod cf;
pub mod importance;
pub mod models;
pub mod rng;
pub mod tabular;

pub use cf::{
    CfError, CfQuery, Counterfactual, CounterfactualSet, DiffEntry, DistanceMode, Optimizer,
};
pub use importance::{ImportanceError, ImportanceReport, ImportanceScope};
pub use models::{MetricsReport, ModelError, TrainedModel};
pub use tabular::{Dataset, FeatureKind, FeatureSchema, FeatureSpec, Instance, TabularError};
