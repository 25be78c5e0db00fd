//! L2-regularized logistic regression trained by full-batch gradient descent.
//!
//! The objective is `mean(softplus(z) - y*z) + (l2/2)*|w|^2` with
//! `z = w.x + b`. Each epoch takes a proximal gradient step (the ridge term is
//! applied in closed form, so large `l2` stays stable) and halves the step
//! size until the objective does not increase.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl LogisticModel {
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 500,
            l2: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub model: LogisticModel,
    /// Objective before training followed by one entry per completed epoch.
    pub loss_history: Vec<f64>,
}

/// Objective value and its gradient with respect to the weights and the bias.
pub fn loss_and_gradient(
    model: &LogisticModel,
    x: &[Vec<f64>],
    y: &[u8],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let (data_loss, mut grad_w, grad_b) = data_loss_and_gradient(model, x, y);
    let norm2: f64 = model.weights.iter().map(|w| w * w).sum();
    for (g, w) in grad_w.iter_mut().zip(&model.weights) {
        *g += l2 * w;
    }
    (data_loss + 0.5 * l2 * norm2, grad_w, grad_b)
}

fn data_loss_and_gradient(model: &LogisticModel, x: &[Vec<f64>], y: &[u8]) -> (f64, Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; model.weights.len()];
    let mut grad_b = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z = model.logit(row);
        let t = f64::from(label);
        loss += softplus(z) - t * z;
        let residual = sigmoid(z) - t;
        for (g, v) in grad_w.iter_mut().zip(row) {
            *g += residual * v;
        }
        grad_b += residual;
    }
    grad_w.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad_w, grad_b / n)
}

fn objective(model: &LogisticModel, x: &[Vec<f64>], y: &[u8], l2: f64) -> f64 {
    let n = x.len() as f64;
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &label)| {
            let z = model.logit(row);
            softplus(z) - f64::from(label) * z
        })
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>()
}

pub fn fit_logistic_regression(
    x: &[Vec<f64>],
    y: &[u8],
    params: &LogisticParams,
    seed: u64,
) -> Result<LogisticFit, ModelError> {
    if x.is_empty() {
        return Err(ModelError::EmptyTraining);
    }
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch {
            predictions: x.len(),
            labels: y.len(),
        });
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) || params.l2 < 0.0 {
        return Err(ModelError::InvalidParameter(
            "learning_rate must be positive and l2 non-negative".into(),
        ));
    }
    let width = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != width) {
        return Err(ModelError::WidthMismatch {
            expected: width,
            actual: bad.len(),
        });
    }
    let positives = y.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == y.len() {
        log::warn!("logistic regression trained on a single class");
    }

    let mut rng = seeded(seed);
    let mut model = LogisticModel {
        weights: (0..width).map(|_| rng.random_range(-0.01..0.01)).collect(),
        bias: 0.0,
    };
    let mut lr = params.learning_rate;
    let mut current = objective(&model, x, y, params.l2);
    if !current.is_finite() {
        return Err(ModelError::DivergedTraining { epoch: 0 });
    }
    let mut history = vec![current];

    'epochs: for epoch in 1..=params.epochs {
        let (_, grad_w, grad_b) = data_loss_and_gradient(&model, x, y);
        if grad_w.iter().chain([&grad_b]).any(|g| !g.is_finite()) {
            return Err(ModelError::DivergedTraining { epoch });
        }
        loop {
            let shrink = 1.0 + lr * params.l2;
            let candidate = LogisticModel {
                weights: model
                    .weights
                    .iter()
                    .zip(&grad_w)
                    .map(|(w, g)| (w - lr * g) / shrink)
                    .collect(),
                bias: model.bias - lr * grad_b,
            };
            let value = objective(&candidate, x, y, params.l2);
            if !value.is_finite() {
                return Err(ModelError::DivergedTraining { epoch });
            }
            if value <= current {
                model = candidate;
                current = value;
                history.push(current);
                break;
            }
            lr *= 0.5;
            if lr < 1e-14 {
                // No representable descent step remains.
                break 'epochs;
            }
        }
    }
    Ok(LogisticFit {
        model,
        loss_history: history,
    })
}
