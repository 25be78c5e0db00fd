use super::{Classifier, Counterfactual, Metric};
use crate::models::predicted_class;
use crate::tabular::{FeatureSchema, Instance};

/// Greedy revert of changed features, largest `|delta|` first (ties by
/// ascending feature index). A revert is kept only while the prediction stays
/// `target_class`. Returns the values, their probability and the number of
/// model calls made.
pub(crate) fn revert_changes(
    values: &[f64],
    probability: f64,
    origin: &[f64],
    target_class: u8,
    model: &dyn Classifier,
) -> (Vec<f64>, f64, usize) {
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| values[i] != origin[i]).collect();
    order.sort_by(|&a, &b| {
        let da = (values[a] - origin[a]).abs();
        let db = (values[b] - origin[b]).abs();
        db.total_cmp(&da).then(a.cmp(&b))
    });
    let mut current = values.to_vec();
    let mut p = probability;
    let mut calls = 0;
    for i in order {
        let kept = current[i];
        current[i] = origin[i];
        let trial = model.probability(&current);
        calls += 1;
        if predicted_class(trial) == target_class {
            p = trial;
        } else {
            current[i] = kept;
        }
    }
    (current, p, calls)
}

/// Removes changes the prediction does not depend on. Invalid input is
/// returned unchanged.
pub fn sparsity_pass(
    cf: &Counterfactual,
    origin: &Instance,
    target_class: u8,
    model: &dyn Classifier,
    schema: &FeatureSchema,
    metric: &Metric,
) -> Counterfactual {
    if !cf.valid {
        return cf.clone();
    }
    let (values, p, _) = revert_changes(
        cf.values.values(),
        cf.predicted_probability,
        origin.values(),
        target_class,
        model,
    );
    let diff = schema
        .features
        .iter()
        .zip(values.iter().zip(origin.values()))
        .filter(|(_, (new, old))| new != old)
        .map(|(f, (&new, &old))| super::DiffEntry {
            feature: f.name.clone(),
            old,
            new,
            delta: new - old,
        })
        .collect();
    Counterfactual {
        distance_to_origin: metric.distance(&values, origin.values()),
        valid: predicted_class(p) == target_class,
        predicted_probability: p,
        values: Instance(values),
        diff,
    }
}
