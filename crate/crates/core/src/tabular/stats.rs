//! Median and median absolute deviation.
//!
//! `MAD = median(|x_i - median(x)|)`. A zero MAD (constant or near-constant
//! column) is replaced by [`MAD_FALLBACK`] so that MAD-normalized distances
//! stay finite.

use super::{Dataset, TabularError};

pub const MAD_FALLBACK: f64 = 1.0;

/// Median of a non-empty slice; even lengths average the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mid = n / 2;
    Some(if n % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// Raw MAD without the zero fallback.
pub fn mad_of(values: &[f64]) -> Option<f64> {
    let m = median(values)?;
    let deviations: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&deviations)
}

pub fn mad(dataset: &Dataset, feature: &str) -> Result<f64, TabularError> {
    let idx = dataset.schema.require_index(feature)?;
    column_mad(dataset, idx)
}

fn column_mad(dataset: &Dataset, idx: usize) -> Result<f64, TabularError> {
    let raw = mad_of(&dataset.column(idx)).ok_or(TabularError::EmptyDataset)?;
    Ok(if raw > 0.0 { raw } else { MAD_FALLBACK })
}

/// MAD of every feature, in schema order.
pub fn feature_mads(dataset: &Dataset) -> Result<Vec<f64>, TabularError> {
    (0..dataset.schema.len())
        .map(|i| column_mad(dataset, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{FeatureSchema, FeatureSpec, Instance};
    use proptest::prelude::*;

    fn column(values: &[f64]) -> Dataset {
        let schema = FeatureSchema::new(
            vec![FeatureSpec::continuous("x", -1e9, 1e9)],
            "label",
            "SNRI",
        )
        .unwrap();
        let rows = values.iter().map(|&v| Instance(vec![v])).collect();
        Dataset::new(schema, rows, vec![0; values.len()]).unwrap()
    }

    #[test]
    fn outlier_column() {
        // sorted [1,2,3,4,100]: median 3, deviations [2,1,0,1,97] -> median 1
        assert_eq!(mad(&column(&[1.0, 2.0, 3.0, 4.0, 100.0]), "x").unwrap(), 1.0);
    }

    #[test]
    fn constant_column_falls_back() {
        assert_eq!(mad_of(&[2.0, 2.0, 2.0]), Some(0.0));
        assert_eq!(mad(&column(&[2.0, 2.0, 2.0]), "x").unwrap(), MAD_FALLBACK);
    }

    #[test]
    fn even_length_column() {
        // median 2, deviations all 2
        assert_eq!(mad(&column(&[0.0, 0.0, 4.0, 4.0]), "x").unwrap(), 2.0);
    }

    #[test]
    fn empty_and_unknown() {
        assert_eq!(mad(&column(&[]), "x"), Err(TabularError::EmptyDataset));
        assert!(matches!(
            mad(&column(&[1.0]), "nope"),
            Err(TabularError::UnknownFeature(_))
        ));
    }

    proptest! {
        #[test]
        fn shift_invariant_and_scale_equivariant(
            xs in prop::collection::vec(-100i32..100, 1..40),
            shift in -50i32..50,
            scale in 1u32..8,
        ) {
            let base: Vec<f64> = xs.iter().map(|&v| f64::from(v)).collect();
            let raw = mad_of(&base).unwrap();
            let shifted: Vec<f64> = base.iter().map(|v| v + f64::from(shift)).collect();
            let scaled: Vec<f64> = base.iter().map(|v| v * f64::from(scale)).collect();
            prop_assert!((mad_of(&shifted).unwrap() - raw).abs() < 1e-9);
            prop_assert!((mad_of(&scaled).unwrap() - raw * f64::from(scale)).abs() < 1e-9);
        }
    }
}
