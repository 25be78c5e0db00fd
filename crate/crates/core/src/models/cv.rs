use serde::{Deserialize, Serialize};

use super::{
    compute_metrics, predict_dataset, train, MetricsError, MetricsReport, ModelConfig, ModelError,
    DECISION_THRESHOLD,
};
use crate::rng::derive_seed;
use crate::tabular::{kfold_split, smote_oversample, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub validation_size: usize,
    pub metrics: MetricsReport,
}

/// Arithmetic means of the per-fold metrics. `roc_auc` averages the folds
/// where it is defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub roc_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldReport>,
    pub mean: MeanMetrics,
}

/// k-fold cross-validation. When `smote_neighbors` is set, SMOTE is applied
/// to each training fold only; validation folds are never resampled.
pub fn cross_validate(
    dataset: &Dataset,
    config: &ModelConfig,
    k: usize,
    seed: u64,
    smote_neighbors: Option<usize>,
) -> Result<CvReport, ModelError> {
    let folds = kfold_split(dataset, k, seed)?;
    let mut reports = Vec::with_capacity(k);
    for (i, fold) in folds.iter().enumerate() {
        let mut train_set = dataset.subset(&fold.train);
        if let Some(nb) = smote_neighbors {
            train_set = smote_oversample(&train_set, nb, derive_seed(seed, 1_000 + i as u64))?;
        }
        let validation = dataset.subset(&fold.validation);
        let model = train(config, &train_set, derive_seed(seed, i as u64))?;
        let scores = predict_dataset(&model, &validation)?;
        let metrics = match compute_metrics(&scores, &validation.labels, DECISION_THRESHOLD) {
            Ok(m) => m,
            Err(MetricsError::SingleClassLabels { partial }) => *partial,
            Err(e) => return Err(e.into()),
        };
        reports.push(FoldReport {
            fold: i,
            train_size: train_set.len(),
            validation_size: validation.len(),
            metrics,
        });
    }
    let mean = mean_metrics(&reports);
    Ok(CvReport {
        k,
        seed,
        folds: reports,
        mean,
    })
}

fn mean_metrics(folds: &[FoldReport]) -> MeanMetrics {
    let n = folds.len() as f64;
    let avg = |f: fn(&MetricsReport) -> f64| folds.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
    let aucs: Vec<f64> = folds.iter().filter_map(|r| r.metrics.roc_auc).collect();
    MeanMetrics {
        accuracy: avg(|m| m.accuracy),
        f1: avg(|m| m.f1),
        precision: avg(|m| m.precision),
        recall: avg(|m| m.recall),
        roc_auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ForestParams, ModelKind};
    use crate::tabular::{synth_generate, RuleTerm, SynthConfig};

    fn planted(rows: usize, noise: f64) -> Dataset {
        let cfg = SynthConfig {
            rows,
            noise_rate: noise,
            decisive: vec![
                RuleTerm {
                    feature: "ham01".into(),
                    weight: 1.0,
                },
                RuleTerm {
                    feature: "ham09".into(),
                    weight: 1.0,
                },
            ],
            threshold: 4.0,
            schema: None,
        };
        synth_generate(&cfg, 3).unwrap()
    }

    #[test]
    fn five_folds_of_twenty() {
        let ds = planted(100, 0.0);
        let cfg = ModelConfig::default_for(ModelKind::Tree);
        let report = cross_validate(&ds, &cfg, 5, 1, None).unwrap();
        assert_eq!(report.folds.len(), 5);
        assert!(report.folds.iter().all(|f| f.validation_size == 20 && f.train_size == 80));
        let mean_acc = report.folds.iter().map(|f| f.metrics.accuracy).sum::<f64>() / 5.0;
        assert_eq!(report.mean.accuracy, mean_acc);
        let mean_f1 = report.folds.iter().map(|f| f.metrics.f1).sum::<f64>() / 5.0;
        assert_eq!(report.mean.f1, mean_f1);
    }

    #[test]
    fn noiseless_forest_cv_is_accurate() {
        let ds = planted(600, 0.0);
        let cfg = ModelConfig::Forest(ForestParams {
            n_trees: 60,
            ..ForestParams::default()
        });
        let report = cross_validate(&ds, &cfg, 5, 7, None).unwrap();
        assert!(report.mean.accuracy >= 0.95, "{}", report.mean.accuracy);
    }

    #[test]
    fn smote_only_touches_training_folds() {
        let mut ds = planted(200, 0.0);
        // Make classes unequal so SMOTE has work to do.
        let keep: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels[i] == 0 || i % 3 == 0).collect();
        ds = ds.subset(&keep);
        let cfg = ModelConfig::default_for(ModelKind::Tree);
        let plain = cross_validate(&ds, &cfg, 5, 2, None).unwrap();
        let balanced = cross_validate(&ds, &cfg, 5, 2, Some(5)).unwrap();
        for (a, b) in plain.folds.iter().zip(&balanced.folds) {
            assert_eq!(a.validation_size, b.validation_size);
            assert!(b.train_size > a.train_size);
        }
    }
}
