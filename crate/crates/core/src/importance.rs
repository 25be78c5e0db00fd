//! Feature importance as frequency of change across counterfactuals.
//!
//! The local score of a feature is the fraction of an instance's valid
//! counterfactuals in which it differs from the instance. The global score
//! is the mean local score over every instance whose generation succeeded;
//! failed instances are counted separately rather than averaged in as zeros.

use std::collections::BTreeSet;
use std::io::Write;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cf::{
    generate_diverse_cfs, CfError, CfQuery, Classifier, CounterfactualSet, DistanceMode,
    Optimizer, DEFAULT_BUDGET, DEFAULT_LAMBDA1, DEFAULT_LAMBDA2,
};
use crate::models::predicted_class;
use crate::rng::derive_seed;
use crate::tabular::{Dataset, FeatureSchema, Instance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImportanceError {
    #[error("counterfactual generation failed: {0}")]
    GenerationFailed(#[from] CfError),
    #[error("generation failed for all {attempted} instances")]
    AllGenerationsFailed { attempted: usize },
    #[error("csv output failed: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceScope {
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub scope: ImportanceScope,
    /// Every schema feature, in schema order.
    pub scores: IndexMap<String, f64>,
    pub k_per_instance: usize,
    pub instances_covered: usize,
    pub failures: usize,
}

impl ImportanceReport {
    /// Features sorted by descending score; ties keep schema order.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self.scores.iter().map(|(k, &s)| (k.as_str(), s)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }

    /// Writes `feature,score` rows in ranked order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ImportanceError> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| ImportanceError::Io(e.to_string());
        w.write_record(["feature", "score"]).map_err(io)?;
        for (name, score) in self.ranked() {
            w.write_record([name, &score.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| ImportanceError::Io(e.to_string()))
    }
}

/// Search settings shared by local and global runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceConfig {
    pub k: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub budget: usize,
    pub distance_mode: DistanceMode,
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        Self {
            k: 10,
            lambda1: DEFAULT_LAMBDA1,
            lambda2: DEFAULT_LAMBDA2,
            budget: DEFAULT_BUDGET,
            distance_mode: DistanceMode::default(),
        }
    }
}

/// Local report from an already generated set.
pub fn local_from_set(set: &CounterfactualSet, schema: &FeatureSchema) -> ImportanceReport {
    let valid: Vec<_> = set.cfs.iter().filter(|c| c.valid).collect();
    let n = valid.len().max(1) as f64;
    let origin = set.query.origin.values();
    let scores = schema
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let changed = valid.iter().filter(|c| c.values[i] != origin[i]).count();
            (f.name.clone(), changed as f64 / n)
        })
        .collect();
    ImportanceReport {
        scope: ImportanceScope::Local,
        scores,
        k_per_instance: set.query.k,
        instances_covered: 1,
        failures: 0,
    }
}

/// Generates `config.k` counterfactuals towards the class opposite to the
/// model's prediction and scores how often each feature changed.
pub fn local_importance(
    origin: &Instance,
    model: &dyn Classifier,
    schema: &FeatureSchema,
    mads: &[f64],
    immutable: &BTreeSet<String>,
    config: &ImportanceConfig,
    seed: u64,
) -> Result<ImportanceReport, ImportanceError> {
    local_with_set(origin, model, schema, mads, immutable, config, seed).map(|(r, _)| r)
}

/// [`local_importance`] that also returns the generated set.
pub fn local_with_set(
    origin: &Instance,
    model: &dyn Classifier,
    schema: &FeatureSchema,
    mads: &[f64],
    immutable: &BTreeSet<String>,
    config: &ImportanceConfig,
    seed: u64,
) -> Result<(ImportanceReport, CounterfactualSet), ImportanceError> {
    origin.validate(schema, 0).map_err(CfError::from)?;
    let target = 1 - predicted_class(model.probability(origin.values()));
    let query = CfQuery {
        origin: origin.clone(),
        target_class: target,
        k: config.k,
        immutable: immutable.clone(),
        lambda1: config.lambda1,
        lambda2: config.lambda2,
        optimizer: Some(Optimizer::Evolutionary),
        seed,
        budget: config.budget,
        distance_mode: config.distance_mode,
    };
    let set = generate_diverse_cfs(&query, model, schema, mads)?;
    Ok((local_from_set(&set, schema), set))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub report: ImportanceReport,
    /// One entry per dataset row; `None` where generation failed.
    pub locals: Vec<Option<ImportanceReport>>,
}

/// Mean of local reports; `None` when there are none.
pub fn mean_of_locals<'a>(
    locals: impl IntoIterator<Item = &'a ImportanceReport>,
    schema: &FeatureSchema,
    k: usize,
    failures: usize,
) -> Option<ImportanceReport> {
    let mut sums = vec![0.0; schema.len()];
    let mut n = 0usize;
    for local in locals {
        for (s, v) in sums.iter_mut().zip(local.scores.values()) {
            *s += v;
        }
        n += 1;
    }
    (n > 0).then(|| ImportanceReport {
        scope: ImportanceScope::Global,
        scores: schema
            .features
            .iter()
            .zip(sums)
            .map(|(f, s)| (f.name.clone(), s / n as f64))
            .collect(),
        k_per_instance: k,
        instances_covered: n,
        failures,
    })
}

/// Local importance for every row (row `i` uses `derive_seed(seed, i)`, in
/// parallel) averaged over the successes. No immutability constraints apply.
pub fn global_importance(
    dataset: &Dataset,
    model: &dyn Classifier,
    mads: &[f64],
    config: &ImportanceConfig,
    seed: u64,
) -> Result<GlobalImportance, ImportanceError> {
    let schema = &dataset.schema;
    let none = BTreeSet::new();
    let locals: Vec<Option<ImportanceReport>> = dataset
        .rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            match local_importance(row, model, schema, mads, &none, config, derive_seed(seed, i as u64)) {
                Ok(r) => Some(r),
                Err(e) => {
                    log::debug!("row {i}: {e}");
                    None
                }
            }
        })
        .collect();
    let failures = locals.iter().filter(|l| l.is_none()).count();
    let report = mean_of_locals(locals.iter().flatten(), schema, config.k, failures).ok_or(
        ImportanceError::AllGenerationsFailed {
            attempted: locals.len(),
        },
    )?;
    Ok(GlobalImportance { report, locals })
}
