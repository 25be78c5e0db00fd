use super::{dpp_diversity, hinge_loss, Classifier, Metric};

/// Evaluated terms of the diverse-counterfactual objective
/// `mean(hinge) + lambda1 * mean(distance to origin) - lambda2 * det(K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveTerms {
    pub hinges: Vec<f64>,
    pub distances: Vec<f64>,
    pub diversity: f64,
    pub value: f64,
}

/// Combines per-counterfactual hinge losses and distances with a diversity
/// value.
pub fn objective_from_terms(
    hinges: &[f64],
    distances: &[f64],
    diversity: f64,
    lambda1: f64,
    lambda2: f64,
) -> f64 {
    debug_assert_eq!(hinges.len(), distances.len());
    let k = hinges.len() as f64;
    hinges.iter().sum::<f64>() / k + lambda1 * distances.iter().sum::<f64>() / k
        - lambda2 * diversity
}

#[allow(clippy::too_many_arguments)]
pub fn dice_objective(
    cfs: &[&[f64]],
    origin: &[f64],
    target_class: u8,
    lambda1: f64,
    lambda2: f64,
    model: &dyn Classifier,
    metric: &Metric,
) -> ObjectiveTerms {
    let hinges: Vec<f64> = cfs
        .iter()
        .map(|cf| hinge_loss(model.probability(cf), target_class))
        .collect();
    let distances: Vec<f64> = cfs.iter().map(|cf| metric.distance(cf, origin)).collect();
    let diversity = dpp_diversity(cfs, metric);
    let value = objective_from_terms(&hinges, &distances, diversity, lambda1, lambda2);
    ObjectiveTerms {
        hinges,
        distances,
        diversity,
        value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::DistanceMode;
    use crate::tabular::{FeatureSchema, FeatureSpec};

    #[test]
    fn substitution_case() {
        let v = objective_from_terms(&[0.2, 0.4], &[1.0, 2.0], 0.75, 0.5, 1.0);
        assert!((v - 0.3).abs() < 1e-12, "{v}");
    }

    #[test]
    fn zero_lambdas_leave_mean_hinge() {
        let v = objective_from_terms(&[0.2, 0.4, 0.9], &[5.0, 1.0, 2.0], 0.1, 0.0, 0.0);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn duplicating_a_counterfactual_costs_the_diversity_term() {
        let s = FeatureSchema::new(
            vec![FeatureSpec::ordinal("a", 4), FeatureSpec::ordinal("b", 4)],
            "label",
            "SNRI",
        )
        .unwrap();
        let metric = Metric::new(&s, &[1.0, 1.0], DistanceMode::OrdinalAsCategorical).unwrap();
        let model = |x: &[f64]| (x[0] / 4.0).min(1.0);
        let origin = [0.0, 0.0];
        let a = [3.0, 0.0];
        let b = [3.0, 2.0];
        let (l1, l2) = (0.5, 1.0);

        let distinct = dice_objective(&[&a, &b], &origin, 1, l1, l2, &model, &metric);
        let duplicate = dice_objective(&[&a, &a], &origin, 1, l1, l2, &model, &metric);
        assert_eq!(duplicate.diversity, 0.0);

        // Independent recomputation of both configurations term by term.
        let hinge_a = 1.0 - 0.75;
        let (dist_a, dist_b) = (0.5, 1.0);
        let k_ab = 1.0 / (1.0 + 0.5);
        let det = 1.0 - k_ab * k_ab;
        let expect_distinct = hinge_a + l1 * (dist_a + dist_b) / 2.0 - l2 * det;
        let expect_duplicate = hinge_a + l1 * dist_a;
        assert!((distinct.value - expect_distinct).abs() < 1e-12);
        assert!((duplicate.value - expect_duplicate).abs() < 1e-12);
        // Here b also costs extra proximity; the diversity share of the rise is l2 * det.
        let rise = duplicate.value - distinct.value;
        let proximity_gain = l1 * (dist_a - (dist_a + dist_b) / 2.0);
        assert!((rise - (l2 * det + proximity_gain)).abs() < 1e-12);
    }
}
