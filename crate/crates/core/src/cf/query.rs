use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CfError, Classifier, DistanceMode, Metric};
use crate::models::predicted_class;
use crate::tabular::{FeatureSchema, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Gradient,
    Evolutionary,
}

pub const DEFAULT_LAMBDA1: f64 = 0.5;
pub const DEFAULT_LAMBDA2: f64 = 1.0;
pub const DEFAULT_BUDGET: usize = 20_000;

fn default_k() -> usize {
    1
}
fn default_lambda1() -> f64 {
    DEFAULT_LAMBDA1
}
fn default_lambda2() -> f64 {
    DEFAULT_LAMBDA2
}
fn default_budget() -> usize {
    DEFAULT_BUDGET
}

/// One counterfactual request.
///
/// With `optimizer = None` the gradient search is used for a logistic model
/// asked for a single counterfactual and the evolutionary search otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfQuery {
    pub origin: Instance,
    pub target_class: u8,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub immutable: BTreeSet<String>,
    #[serde(default = "default_lambda1")]
    pub lambda1: f64,
    #[serde(default = "default_lambda2")]
    pub lambda2: f64,
    #[serde(default)]
    pub optimizer: Option<Optimizer>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub distance_mode: DistanceMode,
}

impl CfQuery {
    pub fn new(origin: Instance, target_class: u8) -> Self {
        Self {
            origin,
            target_class,
            k: 1,
            immutable: BTreeSet::new(),
            lambda1: DEFAULT_LAMBDA1,
            lambda2: DEFAULT_LAMBDA2,
            optimizer: None,
            seed: 0,
            budget: DEFAULT_BUDGET,
            distance_mode: DistanceMode::default(),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_immutable<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.immutable.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn with_optimizer(mut self, optimizer: Optimizer) -> Self {
        self.optimizer = Some(optimizer);
        self
    }

    /// Checks everything that does not need a model.
    pub fn validate(&self, schema: &FeatureSchema) -> Result<(), CfError> {
        self.origin.validate(schema, 0)?;
        if self.target_class > 1 {
            return Err(CfError::InvalidQuery(format!(
                "target_class must be 0 or 1, got {}",
                self.target_class
            )));
        }
        if self.k == 0 {
            return Err(CfError::InvalidQuery("k must be at least 1".into()));
        }
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CfError::InvalidQuery(format!("{name} must be a finite value >= 0")));
            }
        }
        if let Some(unknown) = self.immutable.iter().find(|n| schema.index_of(n).is_none()) {
            return Err(CfError::InvalidQuery(format!("unknown immutable feature `{unknown}`")));
        }
        if self.budget == 0 {
            return Err(CfError::InvalidQuery("budget must be positive".into()));
        }
        Ok(())
    }
}

/// One changed feature: `delta = new - old`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub feature: String,
    pub old: f64,
    pub new: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterfactual {
    pub values: Instance,
    pub predicted_probability: f64,
    pub valid: bool,
    pub distance_to_origin: f64,
    pub diff: Vec<DiffEntry>,
}

impl Counterfactual {
    pub fn changed_features(&self) -> impl Iterator<Item = &str> {
        self.diff.iter().map(|d| d.feature.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualSet {
    pub query: CfQuery,
    pub cfs: Vec<Counterfactual>,
    pub objective_value: f64,
    pub evaluations_used: usize,
    /// Fewer than `k` valid counterfactuals were found.
    pub partial: bool,
}

/// A validated query bound to a schema, metric and target.
pub(crate) struct Prepared<'a> {
    pub schema: &'a FeatureSchema,
    pub metric: Metric,
    pub origin: Vec<f64>,
    pub target: u8,
    pub immutable: Vec<bool>,
}

impl<'a> Prepared<'a> {
    pub fn new(
        query: &CfQuery,
        schema: &'a FeatureSchema,
        mads: &[f64],
        model: &dyn Classifier,
    ) -> Result<Self, CfError> {
        query.validate(schema)?;
        let metric = Metric::new(schema, mads, query.distance_mode)?;
        let origin = query.origin.values().to_vec();
        let class = predicted_class(model.probability(&origin));
        if class == query.target_class {
            return Err(CfError::TargetEqualsPrediction { class });
        }
        let immutable = schema
            .features
            .iter()
            .map(|f| query.immutable.contains(&f.name))
            .collect();
        Ok(Self {
            schema,
            metric,
            origin,
            target: query.target_class,
            immutable,
        })
    }

    pub fn is_valid(&self, probability: f64) -> bool {
        predicted_class(probability) == self.target
    }

    pub fn mutable_features(&self) -> Vec<usize> {
        (0..self.origin.len()).filter(|&i| !self.immutable[i]).collect()
    }

    pub fn counterfactual(&self, values: Vec<f64>, probability: f64) -> Counterfactual {
        let diff = self
            .schema
            .features
            .iter()
            .zip(values.iter().zip(&self.origin))
            .filter(|(_, (new, old))| new != old)
            .map(|(f, (&new, &old))| DiffEntry {
                feature: f.name.clone(),
                old,
                new,
                delta: new - old,
            })
            .collect();
        Counterfactual {
            distance_to_origin: self.metric.distance(&values, &self.origin),
            valid: self.is_valid(probability),
            predicted_probability: probability,
            values: Instance(values),
            diff,
        }
    }
}
