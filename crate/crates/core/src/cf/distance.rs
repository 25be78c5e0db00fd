//! Proximity between instances.
//!
//! The distance is the sum of two parts, each averaged over its own features:
//!
//! * continuous part: `(1/d_cont) * sum |a_p - b_p| / MAD_p`
//! * categorical part: `(1/d_cat) * sum 1[a_p != b_p]`
//!
//! A part with no features contributes 0. Continuous features always use the
//! MAD form; [`DistanceMode`] decides which part ordinal features join.

use serde::{Deserialize, Serialize};

use super::CfError;
use crate::tabular::{FeatureKind, FeatureSchema, Instance};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Ordinal features count as changed or unchanged (one-hot view).
    #[default]
    OrdinalAsCategorical,
    /// Ordinal features use the MAD-normalized absolute difference.
    OrdinalAsContinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Part {
    Continuous,
    Categorical,
}

/// Distance function bound to a schema, per-feature MADs and a mode.
#[derive(Debug, Clone)]
pub struct Metric {
    parts: Vec<Part>,
    mads: Vec<f64>,
    n_cont: usize,
    n_cat: usize,
    continuous_weight: f64,
    categorical_weight: f64,
    mode: DistanceMode,
}

impl Metric {
    pub fn new(schema: &FeatureSchema, mads: &[f64], mode: DistanceMode) -> Result<Self, CfError> {
        if mads.len() != schema.len() {
            return Err(CfError::InvalidQuery(format!(
                "{} MADs for {} features",
                mads.len(),
                schema.len()
            )));
        }
        if let Some(bad) = mads.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(CfError::InvalidQuery(format!("MAD {bad} is not positive")));
        }
        let parts: Vec<Part> = schema
            .features
            .iter()
            .map(|f| match (f.kind, mode) {
                (FeatureKind::Ordinal, DistanceMode::OrdinalAsCategorical) => Part::Categorical,
                _ => Part::Continuous,
            })
            .collect();
        let n_cat = parts.iter().filter(|&&p| p == Part::Categorical).count();
        Ok(Self {
            n_cont: parts.len() - n_cat,
            n_cat,
            parts,
            mads: mads.to_vec(),
            continuous_weight: 1.0,
            categorical_weight: 1.0,
            mode,
        })
    }

    /// Reweights the two parts. A nonzero weight on a part without features is
    /// rejected.
    pub fn with_part_weights(mut self, continuous: f64, categorical: f64) -> Result<Self, CfError> {
        if self.n_cont == 0 && continuous != 0.0 {
            return Err(CfError::ModeMismatch {
                part: "continuous",
                weight: continuous,
            });
        }
        if self.n_cat == 0 && categorical != 0.0 {
            return Err(CfError::ModeMismatch {
                part: "categorical",
                weight: categorical,
            });
        }
        self.continuous_weight = continuous;
        self.categorical_weight = categorical;
        Ok(self)
    }

    pub fn mode(&self) -> DistanceMode {
        self.mode
    }

    pub(crate) fn part(&self, feature: usize) -> Part {
        self.parts[feature]
    }

    pub(crate) fn mad(&self, feature: usize) -> f64 {
        self.mads[feature]
    }

    /// Scale applied to a single continuous-part term `|a - b| / MAD`.
    pub(crate) fn continuous_scale(&self) -> f64 {
        if self.n_cont == 0 {
            0.0
        } else {
            self.continuous_weight / self.n_cont as f64
        }
    }

    /// Scale applied to a single categorical indicator.
    pub(crate) fn categorical_scale(&self) -> f64 {
        if self.n_cat == 0 {
            0.0
        } else {
            self.categorical_weight / self.n_cat as f64
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.parts.len());
        let mut cont = 0.0;
        let mut cat = 0usize;
        for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
            match self.parts[i] {
                Part::Continuous => cont += (x - y).abs() / self.mads[i],
                Part::Categorical => cat += usize::from(x != y),
            }
        }
        cont * self.continuous_scale() + cat as f64 * self.categorical_scale()
    }
}

/// One-shot distance between two instances.
pub fn distance(
    a: &Instance,
    b: &Instance,
    schema: &FeatureSchema,
    mads: &[f64],
    mode: DistanceMode,
) -> Result<f64, CfError> {
    a.validate(schema, 0)?;
    b.validate(schema, 0)?;
    Ok(Metric::new(schema, mads, mode)?.distance(a.values(), b.values()))
}
