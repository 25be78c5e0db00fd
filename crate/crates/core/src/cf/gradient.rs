//! Single-counterfactual search for logistic models.
//!
//! The search runs projected gradient descent on a relaxation of the one-hot
//! encoding: each ordinal feature is a point on the probability simplex over
//! its levels and each continuous feature a clamped real. The relaxed
//! objective is `hinge(sigmoid(w.z + b)) + lambda1 * D(z)`, where `D` agrees
//! with the instance distance at every vertex:
//!
//! * categorical ordinal: half the L1 distance between the slice and the
//!   origin's one-hot slice (1 at a different vertex, 0 at the same one);
//! * continuous ordinal: MAD-scaled distance of the expected level;
//! * continuous: MAD-scaled absolute difference.
//!
//! Every iterate is decoded (argmax level, ties to the origin's level) and
//! checked against the model; the best valid decoded instance wins.

use super::sparsity::revert_changes;
use super::{
    hinge_loss, loss::hinge_slope, CfError, CfQuery, CounterfactualSet, Metric, Prepared,
};
use crate::cf::distance::Part;
use crate::models::LogisticModel;
use crate::tabular::{Encoder, FeatureKind, FeatureSchema};

pub const GRADIENT_STEP: f64 = 0.1;
/// Iterations the decoded instance must stay valid and unchanged before stopping.
pub const GRADIENT_PATIENCE: usize = 20;
const STATIONARY: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Slot {
    offset: usize,
    width: usize,
    kind: FeatureKind,
    part: Part,
    mad: f64,
    origin: f64,
    lower: f64,
    upper: f64,
    immutable: bool,
}

/// The relaxed single-counterfactual objective and its gradient.
#[derive(Debug, Clone)]
pub struct RelaxedObjective<'a> {
    model: &'a LogisticModel,
    slots: Vec<Slot>,
    origin_bits: Vec<f64>,
    target: u8,
    lambda1: f64,
    continuous_scale: f64,
    categorical_scale: f64,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl<'a> RelaxedObjective<'a> {
    pub fn new(
        model: &'a LogisticModel,
        schema: &FeatureSchema,
        metric: &Metric,
        origin: &[f64],
        immutable: &[bool],
        target: u8,
        lambda1: f64,
    ) -> Self {
        let encoder = Encoder::new(schema);
        let slots = schema
            .features
            .iter()
            .zip(encoder.slots())
            .enumerate()
            .map(|(i, (f, s))| Slot {
                offset: s.offset,
                width: s.width,
                kind: f.kind,
                part: metric.part(i),
                mad: metric.mad(i),
                origin: origin[i],
                lower: f.lower(),
                upper: f.upper(),
                immutable: immutable.get(i).copied().unwrap_or(false),
            })
            .collect();
        Self {
            model,
            slots,
            origin_bits: encoder.encode_values(origin),
            target,
            lambda1,
            continuous_scale: metric.continuous_scale(),
            categorical_scale: metric.categorical_scale(),
        }
    }

    pub fn width(&self) -> usize {
        self.origin_bits.len()
    }

    pub fn origin_bits(&self) -> &[f64] {
        &self.origin_bits
    }

    fn expected_level(z: &[f64]) -> f64 {
        z.iter().enumerate().map(|(l, v)| l as f64 * v).sum()
    }

    pub fn relaxed_distance(&self, z: &[f64]) -> f64 {
        let mut d = 0.0;
        for s in &self.slots {
            let zs = &z[s.offset..s.offset + s.width];
            d += match (s.kind, s.part) {
                (FeatureKind::Ordinal, Part::Categorical) => {
                    let os = &self.origin_bits[s.offset..s.offset + s.width];
                    let l1: f64 = zs.iter().zip(os).map(|(a, b)| (a - b).abs()).sum();
                    self.categorical_scale * 0.5 * l1
                }
                (FeatureKind::Ordinal, _) => {
                    self.continuous_scale * (Self::expected_level(zs) - s.origin).abs() / s.mad
                }
                (FeatureKind::Continuous, _) => {
                    self.continuous_scale * (zs[0] - s.origin).abs() / s.mad
                }
            };
        }
        d
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        hinge_loss(self.model.predict(z), self.target) + self.lambda1 * self.relaxed_distance(z)
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let p = self.model.predict(z);
        let scale = hinge_slope(p, self.target) * p * (1.0 - p);
        let mut g: Vec<f64> = self.model.weights.iter().map(|w| scale * w).collect();
        for s in &self.slots {
            let range = s.offset..s.offset + s.width;
            match (s.kind, s.part) {
                (FeatureKind::Ordinal, Part::Categorical) => {
                    let c = self.lambda1 * self.categorical_scale * 0.5;
                    for j in range {
                        g[j] += c * sign(z[j] - self.origin_bits[j]);
                    }
                }
                (FeatureKind::Ordinal, _) => {
                    let c = self.lambda1 * self.continuous_scale / s.mad
                        * sign(Self::expected_level(&z[range.clone()]) - s.origin);
                    for (l, j) in range.enumerate() {
                        g[j] += c * l as f64;
                    }
                }
                (FeatureKind::Continuous, _) => {
                    g[s.offset] +=
                        self.lambda1 * self.continuous_scale / s.mad * sign(z[s.offset] - s.origin);
                }
            }
        }
        g
    }

    /// Projects onto the relaxed feasible set: simplex per ordinal slice,
    /// range clamp per continuous slot, origin for immutable features.
    pub fn project(&self, z: &mut [f64]) {
        for s in &self.slots {
            let range = s.offset..s.offset + s.width;
            if s.immutable {
                z[range.clone()].copy_from_slice(&self.origin_bits[range]);
                continue;
            }
            match s.kind {
                FeatureKind::Ordinal => project_simplex(&mut z[range]),
                FeatureKind::Continuous => z[s.offset] = z[s.offset].clamp(s.lower, s.upper),
            }
        }
    }

    /// Nearest instance: argmax level per ordinal slice, ties to the origin's
    /// level and then to the lower level.
    pub fn decode(&self, z: &[f64]) -> Vec<f64> {
        self.slots
            .iter()
            .map(|s| match s.kind {
                FeatureKind::Continuous => z[s.offset],
                FeatureKind::Ordinal => {
                    let zs = &z[s.offset..s.offset + s.width];
                    let home = s.origin as usize;
                    let mut best = home;
                    for (l, &v) in zs.iter().enumerate() {
                        if v > zs[best] {
                            best = l;
                        }
                    }
                    best as f64
                }
            })
            .collect()
    }
}

/// Euclidean projection onto `{x >= 0, sum x = 1}` (sort-based).
pub(crate) fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
}

/// Gradient search for one counterfactual of a logistic model.
pub fn generate_single_cf(
    query: &CfQuery,
    model: &LogisticModel,
    schema: &FeatureSchema,
    mads: &[f64],
) -> Result<CounterfactualSet, CfError> {
    let encoder = Encoder::new(schema);
    if encoder.width() != model.weights.len() {
        return Err(CfError::InvalidQuery(format!(
            "model expects {} encoded inputs, schema encodes to {}",
            model.weights.len(),
            encoder.width()
        )));
    }
    if query.k != 1 {
        return Err(CfError::InvalidQuery(
            "the gradient optimizer returns exactly one counterfactual; use k = 1".into(),
        ));
    }
    let classifier = |x: &[f64]| model.predict(&encoder.encode_values(x));
    let prep = Prepared::new(query, schema, mads, &classifier)?;
    let objective = RelaxedObjective::new(
        model,
        schema,
        &prep.metric,
        &prep.origin,
        &prep.immutable,
        prep.target,
        query.lambda1,
    );
    let single_objective =
        |x: &[f64], p: f64| hinge_loss(p, prep.target) + query.lambda1 * prep.metric.distance(x, &prep.origin);

    let mut z = objective.origin_bits().to_vec();
    let mut evaluations = 1;
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut last_decoded: Option<Vec<f64>> = None;
    let mut stable = 0;

    while evaluations < query.budget {
        let g = objective.gradient(&z);
        let mut next: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a - GRADIENT_STEP * b).collect();
        objective.project(&mut next);
        evaluations += 1;

        let moved = next
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        z = next;

        let decoded = objective.decode(&z);
        if last_decoded.as_ref() == Some(&decoded) {
            stable += 1;
        } else {
            stable = 0;
            let p = classifier(&decoded);
            evaluations += 1;
            if prep.is_valid(p) {
                let value = single_objective(&decoded, p);
                if best.as_ref().is_none_or(|b| value < b.2) {
                    best = Some((decoded.clone(), p, value));
                }
            }
            last_decoded = Some(decoded);
        }

        if best.is_some() && stable >= GRADIENT_PATIENCE {
            break;
        }
        if moved < STATIONARY {
            break;
        }
    }

    let Some((values, p, _)) = best else {
        return Err(CfError::NoCounterfactualFound { evaluations });
    };
    let (values, p, calls) = revert_changes(&values, p, &prep.origin, prep.target, &classifier);
    evaluations += calls;
    let objective_value = single_objective(&values, p);
    let cf = prep.counterfactual(values, p);
    debug_assert!(cf.valid);
    Ok(CounterfactualSet {
        query: query.clone(),
        cfs: vec![cf],
        objective_value,
        evaluations_used: evaluations,
        partial: false,
    })
}
