//! SMOTE oversampling for ordinal/continuous rows.
//!
//! Synthetic minority rows are `x + u * (neighbor - x)` with `u ~ U[0, 1]`
//! and `neighbor` one of the `k` nearest minority rows (Euclidean, ties by
//! index). Ordinal coordinates are rounded to the nearest level, so every
//! synthetic row is valid under the schema.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Dataset, Instance, TabularError};
use crate::rng::seeded;

pub const DEFAULT_SMOTE_NEIGHBORS: usize = 5;

pub fn smote_oversample(
    dataset: &Dataset,
    k_neighbors: usize,
    seed: u64,
) -> Result<Dataset, TabularError> {
    if k_neighbors == 0 {
        return Err(TabularError::InvalidParameter(
            "k_neighbors must be at least 1".into(),
        ));
    }
    let [zeros, ones] = dataset.class_counts();
    if zeros == ones {
        return Ok(dataset.clone());
    }
    let minority_label: u8 = if ones < zeros { 1 } else { 0 };
    let needed = zeros.max(ones) - zeros.min(ones);

    let minority: Vec<usize> = (0..dataset.len())
        .filter(|&i| dataset.labels[i] == minority_label)
        .collect();
    if minority.len() < 2 {
        return Err(TabularError::TooFewMinoritySamples {
            found: minority.len(),
        });
    }
    let k = k_neighbors.min(minority.len() - 1);
    let neighbors = nearest_neighbors(dataset, &minority, k);

    let mut rng = seeded(seed);
    let mut order: Vec<usize> = (0..minority.len()).collect();
    order.shuffle(&mut rng);

    let mut out = dataset.clone();
    out.rows.reserve(needed);
    out.labels.reserve(needed);
    for i in 0..needed {
        let pos = order[i % order.len()];
        let base = &dataset.rows[minority[pos]];
        let nb = &dataset.rows[neighbors[pos][rng.random_range(0..k)]];
        let u: f64 = rng.random();
        let values = dataset
            .schema
            .features
            .iter()
            .zip(base.values().iter().zip(nb.values()))
            .map(|(spec, (&a, &b))| spec.snap(a + u * (b - a)))
            .collect();
        out.rows.push(Instance(values));
        out.labels.push(minority_label);
    }
    Ok(out)
}

/// For each minority row, the dataset indices of its `k` nearest minority rows.
fn nearest_neighbors(dataset: &Dataset, minority: &[usize], k: usize) -> Vec<Vec<usize>> {
    minority
        .iter()
        .map(|&i| {
            let xi = dataset.rows[i].values();
            let mut dists: Vec<(f64, usize)> = minority
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| {
                    let d: f64 = xi
                        .iter()
                        .zip(dataset.rows[j].values())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d, j)
                })
                .collect();
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dists.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{FeatureSchema, FeatureSpec};
    use proptest::prelude::*;

    fn two_feature_schema() -> FeatureSchema {
        FeatureSchema::new(
            vec![FeatureSpec::ordinal("a", 2), FeatureSpec::ordinal("b", 2)],
            "label",
            "SNRI",
        )
        .unwrap()
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let s = two_feature_schema();
        let ds = Dataset::new(
            s,
            vec![Instance(vec![0.0, 1.0]), Instance(vec![2.0, 2.0])],
            vec![0, 1],
        )
        .unwrap();
        assert_eq!(smote_oversample(&ds, 5, 1).unwrap(), ds);
    }

    #[test]
    fn segment_interpolants_snap_to_levels() {
        // Oracle: enumerate u over a fine grid and collect all roundings of
        // (0,0) + u * ((2,2) - (0,0)).
        let mut reachable = std::collections::BTreeSet::new();
        for step in 0..=1000 {
            let u = f64::from(step) / 1000.0;
            let c = (2.0 * u).round() as i64;
            reachable.insert((c, c));
        }
        assert_eq!(
            reachable.iter().copied().collect::<Vec<_>>(),
            vec![(0, 0), (1, 1), (2, 2)]
        );

        let s = two_feature_schema();
        let mut rows = vec![Instance(vec![0.0, 0.0]), Instance(vec![2.0, 2.0])];
        let mut labels = vec![1, 1];
        for _ in 0..8 {
            rows.push(Instance(vec![1.0, 0.0]));
            labels.push(0);
        }
        let ds = Dataset::new(s, rows, labels).unwrap();
        let out = smote_oversample(&ds, 1, 3).unwrap();
        assert_eq!(out.class_counts(), [8, 8]);
        for row in &out.rows[ds.len()..] {
            let p = (row[0] as i64, row[1] as i64);
            assert!(reachable.contains(&p), "{p:?} not on the segment");
        }
    }

    #[test]
    fn ten_versus_four() {
        let s = two_feature_schema();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            rows.push(Instance(vec![f64::from(i % 3), 0.0]));
            labels.push(0);
        }
        for i in 0..4 {
            rows.push(Instance(vec![f64::from(i % 3), 2.0]));
            labels.push(1);
        }
        let ds = Dataset::new(s, rows, labels).unwrap();
        let out = smote_oversample(&ds, 5, 9).unwrap();
        assert_eq!(out.class_counts(), [10, 10]);
        assert_eq!(out.len(), 20);
    }

    #[test]
    fn single_minority_row_is_rejected() {
        let s = two_feature_schema();
        let ds = Dataset::new(
            s,
            vec![
                Instance(vec![0.0, 0.0]),
                Instance(vec![1.0, 0.0]),
                Instance(vec![2.0, 2.0]),
            ],
            vec![0, 0, 1],
        )
        .unwrap();
        assert_eq!(
            smote_oversample(&ds, 5, 0),
            Err(TabularError::TooFewMinoritySamples { found: 1 })
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn balance_validity_and_preservation(
            rows in prop::collection::vec((0u32..5, 0u32..3, any::<bool>()), 4..40),
            k in 1usize..7,
            seed in any::<u64>(),
        ) {
            let schema = FeatureSchema::new(
                vec![FeatureSpec::ordinal("a", 4), FeatureSpec::ordinal("b", 2)],
                "label",
                "SNRI",
            ).unwrap();
            let labels: Vec<u8> = rows.iter().map(|r| u8::from(r.2)).collect();
            let ones = labels.iter().filter(|&&l| l == 1).count();
            let minority = ones.min(labels.len() - ones);
            let ds = Dataset::new(
                schema.clone(),
                rows.iter().map(|r| Instance(vec![f64::from(r.0), f64::from(r.1)])).collect(),
                labels,
            ).unwrap();
            match smote_oversample(&ds, k, seed) {
                Ok(out) => {
                    let [a, b] = out.class_counts();
                    prop_assert_eq!(a, b);
                    prop_assert_eq!(&out.rows[..ds.len()], &ds.rows[..]);
                    prop_assert_eq!(&out.labels[..ds.len()], &ds.labels[..]);
                    for (i, r) in out.rows.iter().enumerate() {
                        prop_assert!(r.validate(&schema, i).is_ok());
                    }
                    prop_assert_eq!(out, smote_oversample(&ds, k, seed).unwrap());
                }
                Err(TabularError::TooFewMinoritySamples { found }) => {
                    prop_assert!(minority < 2);
                    prop_assert_eq!(found, minority);
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }
}
