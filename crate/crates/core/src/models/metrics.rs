//! Binary classification metrics.
//!
//! Precision, recall and F1 are computed per class and averaged with weights
//! proportional to each class's label count. ROC-AUC is the probability that
//! a random positive scores above a random negative, ties counting one half
//! (computed from mid-ranks).

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Class 1 is predicted iff `probability >= DECISION_THRESHOLD`.
pub const DECISION_THRESHOLD: f64 = 0.5;

pub fn predicted_class(probability: f64) -> u8 {
    u8::from(probability >= DECISION_THRESHOLD)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tp: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tn + self.fp + self.fn_ + self.tp
    }

    pub fn accuracy(&self) -> f64 {
        (self.tn + self.tp) as f64 / self.total() as f64
    }
}

impl std::ops::Add for Confusion {
    type Output = Confusion;
    fn add(self, o: Confusion) -> Confusion {
        Confusion {
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tp: self.tp + o.tp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    /// `None` only inside [`MetricsError::SingleClassLabels`].
    pub roc_auc: Option<f64>,
    pub confusion: Confusion,
}

pub fn confusion_matrix(predictions: &[u8], labels: &[u8]) -> Result<Confusion, MetricsError> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut c = Confusion::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        match (l, p) {
            (0, 0) => c.tn += 1,
            (0, _) => c.fp += 1,
            (_, 0) => c.fn_ += 1,
            _ => c.tp += 1,
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// ROC-AUC via the rank-sum statistic. Errors when only one class is present.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: scores.len(),
            labels: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClassLabels {
            partial: Box::new(empty_report()),
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based; the tie block i..=j shares the mean rank
        let mid_rank = (i + j) as f64 / 2.0 + 1.0;
        let block_pos = order[i..=j].iter().filter(|&&k| labels[k] == 1).count();
        positive_rank_sum += mid_rank * block_pos as f64;
        i = j + 1;
    }
    let n_pos_f = n_pos as f64;
    Ok((positive_rank_sum - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

fn empty_report() -> MetricsReport {
    MetricsReport {
        accuracy: 0.0,
        f1: 0.0,
        precision: 0.0,
        recall: 0.0,
        roc_auc: None,
        confusion: Confusion::default(),
    }
}

/// Metrics from confusion counts alone (no ROC-AUC).
pub fn metrics_from_confusion(c: Confusion) -> MetricsReport {
    let total = c.total();
    let support = [c.tn + c.fp, c.fn_ + c.tp];
    // per-class (precision, recall)
    let class0 = (ratio(c.tn, c.tn + c.fn_), ratio(c.tn, support[0]));
    let class1 = (ratio(c.tp, c.tp + c.fp), ratio(c.tp, support[1]));
    let w0 = ratio(support[0], total);
    let w1 = ratio(support[1], total);
    MetricsReport {
        accuracy: ratio(c.tn + c.tp, total),
        precision: w0 * class0.0 + w1 * class1.0,
        recall: w0 * class0.1 + w1 * class1.1,
        f1: w0 * f1(class0.0, class0.1) + w1 * f1(class1.0, class1.1),
        roc_auc: None,
        confusion: c,
    }
}

pub fn compute_metrics(
    scores: &[f64],
    labels: &[u8],
    threshold: f64,
) -> Result<MetricsReport, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(MetricsError::Empty);
    }
    let predictions: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    let mut report = metrics_from_confusion(confusion_matrix(&predictions, labels)?);
    match roc_auc(scores, labels) {
        Ok(auc) => {
            report.roc_auc = Some(auc);
            Ok(report)
        }
        Err(MetricsError::SingleClassLabels { .. }) => Err(MetricsError::SingleClassLabels {
            partial: Box::new(report),
        }),
        Err(e) => Err(e),
    }
}
