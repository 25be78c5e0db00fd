//! CART decision tree with Gini impurity.
//!
//! Candidate thresholds are midpoints between consecutive distinct values of
//! a feature among the rows reaching a node; rows with `x <= threshold` go
//! left. Among equal-gain splits the lowest feature index and then the lowest
//! threshold win, so fitting is deterministic.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::rng::{seeded, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        class_probability: f64,
    },
    Split {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn leaf(class_probability: f64) -> Self {
        TreeNode::Leaf { class_probability }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class_probability } => return *class_probability,
                TreeNode::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature_index] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Visits every split as `(feature_index, threshold)`.
    pub fn for_each_split(&self, f: &mut impl FnMut(usize, f64)) {
        if let TreeNode::Split {
            feature_index,
            threshold,
            left,
            right,
        } = self
        {
            f(*feature_index, *threshold);
            left.for_each_split(f);
            right.for_each_split(f);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Fraction of features considered at each split; `1.0` means all of them
    /// and consumes no randomness.
    pub feature_subsample: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 10,
            min_leaf: 1,
            feature_subsample: 1.0,
        }
    }
}

impl TreeParams {
    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        if self.min_leaf == 0 {
            return Err(ModelError::InvalidParameter("min_leaf must be >= 1".into()));
        }
        if !(self.feature_subsample > 0.0 && self.feature_subsample <= 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "feature_subsample {} outside (0, 1]",
                self.feature_subsample
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub n_features: usize,
    /// Set when the training labels held one class only; the tree is then a
    /// constant leaf.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub single_class: bool,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.root.predict(x)
    }
}

pub fn fit_decision_tree(
    x: &[Vec<f64>],
    y: &[u8],
    params: &TreeParams,
    seed: u64,
) -> Result<DecisionTree, ModelError> {
    let rows: Vec<usize> = (0..x.len()).collect();
    fit_on_rows(x, y, &rows, params, seed)
}

/// Fits on the multiset `rows` of indices into `x`/`y` (bootstrap samples
/// repeat indices).
pub(crate) fn fit_on_rows(
    x: &[Vec<f64>],
    y: &[u8],
    rows: &[usize],
    params: &TreeParams,
    seed: u64,
) -> Result<DecisionTree, ModelError> {
    params.validate()?;
    if x.is_empty() || rows.is_empty() {
        return Err(ModelError::EmptyTraining);
    }
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch {
            predictions: x.len(),
            labels: y.len(),
        });
    }
    let n_features = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != n_features) {
        return Err(ModelError::WidthMismatch {
            expected: n_features,
            actual: bad.len(),
        });
    }
    let positives = rows.iter().filter(|&&i| y[i] == 1).count();
    let single_class = positives == 0 || positives == rows.len();
    if single_class {
        log::warn!("decision tree trained on a single class; returning a constant leaf");
    }

    let mut builder = Builder {
        x,
        y,
        params,
        n_features,
        rng: seeded(seed),
    };
    let mut idx = rows.to_vec();
    let root = builder.grow(&mut idx, 0);
    Ok(DecisionTree {
        root,
        n_features,
        single_class,
    })
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    params: &'a TreeParams,
    n_features: usize,
    rng: Rng,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl Builder<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> TreeNode {
        let n = rows.len();
        let pos = rows.iter().filter(|&&i| self.y[i] == 1).count();
        let leaf = TreeNode::leaf(pos as f64 / n as f64);
        if depth >= self.params.max_depth
            || pos == 0
            || pos == n
            || n < 2 * self.params.min_leaf
        {
            return leaf;
        }

        let Some(best) = self.best_split(rows, pos) else {
            return leaf;
        };

        let (feature, threshold) = (best.feature, best.threshold);
        let mut left: Vec<usize> = Vec::with_capacity(n);
        let mut right: Vec<usize> = Vec::with_capacity(n);
        for &i in rows.iter() {
            if self.x[i][feature] <= threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        TreeNode::Split {
            feature_index: feature,
            threshold,
            left: Box::new(self.grow(&mut left, depth + 1)),
            right: Box::new(self.grow(&mut right, depth + 1)),
        }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.n_features;
        if self.params.feature_subsample >= 1.0 {
            return (0..d).collect();
        }
        let m = ((self.params.feature_subsample * d as f64).ceil() as usize).clamp(1, d);
        let mut chosen = sample(&mut self.rng, d, m).into_vec();
        chosen.sort_unstable();
        chosen
    }

    fn best_split(&mut self, rows: &[usize], pos: usize) -> Option<BestSplit> {
        let n = rows.len();
        let parent = gini(pos, n);
        let min_leaf = self.params.min_leaf;
        let mut best: Option<BestSplit> = None;
        let mut column: Vec<(f64, u8)> = Vec::with_capacity(n);

        for feature in self.candidate_features() {
            column.clear();
            column.extend(rows.iter().map(|&i| (self.x[i][feature], self.y[i])));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_pos = 0usize;
            for split in 1..n {
                left_pos += usize::from(column[split - 1].1);
                let (lo, hi) = (column[split - 1].0, column[split].0);
                if lo == hi || split < min_leaf || n - split < min_leaf {
                    continue;
                }
                let right_pos = pos - left_pos;
                let weighted = (split as f64 * gini(left_pos, split)
                    + (n - split) as f64 * gini(right_pos, n - split))
                    / n as f64;
                let gain = parent - weighted;
                if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        feature,
                        threshold: lo + (hi - lo) / 2.0,
                        gain,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn separable_one_feature_splits_between_one_and_two() {
        let x = column(&[0.0, 1.0, 1.0, 2.0, 3.0, 2.0]);
        let y = [0, 0, 0, 1, 1, 1];

        // Oracle: scan a fine threshold grid, keep the set minimizing impurity.
        let impurity = |t: f64| {
            let (mut ln, mut lp, mut rn, mut rp) = (0, 0, 0, 0);
            for (r, &l) in x.iter().zip(&y) {
                if r[0] <= t {
                    ln += 1;
                    lp += usize::from(l);
                } else {
                    rn += 1;
                    rp += usize::from(l);
                }
            }
            (ln as f64 * gini(lp, ln) + rn as f64 * gini(rp, rn)) / 6.0
        };
        let grid: Vec<f64> = (-10..=40).map(|i| f64::from(i) / 10.0 + 0.05).collect();
        let best = grid.iter().map(|&t| impurity(t)).fold(f64::INFINITY, f64::min);
        let optimal: Vec<f64> = grid.iter().copied().filter(|&t| impurity(t) == best).collect();
        assert!(optimal.iter().all(|&t| t > 1.0 && t < 2.0));

        let tree = fit_decision_tree(&x, &y, &TreeParams::default(), 0).unwrap();
        assert_eq!(tree.root.depth(), 1);
        match tree.root {
            TreeNode::Split { threshold, .. } => assert!(threshold > 1.0 && threshold < 2.0),
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn identical_rows_give_single_leaf() {
        let x = vec![vec![1.0, 2.0]; 5];
        let y = [1, 0, 1, 1, 0];
        let tree = fit_decision_tree(&x, &y, &TreeParams::default(), 0).unwrap();
        assert_eq!(tree.root, TreeNode::leaf(0.6));
    }

    #[test]
    fn max_depth_zero_is_a_leaf() {
        let x = column(&[0.0, 1.0, 2.0, 3.0]);
        let params = TreeParams {
            max_depth: 0,
            ..TreeParams::default()
        };
        let tree = fit_decision_tree(&x, &[0, 0, 1, 1], &params, 0).unwrap();
        assert_eq!(tree.root, TreeNode::leaf(0.5));
    }

    #[test]
    fn single_class_flags_and_returns_constant() {
        let x = column(&[0.0, 1.0, 2.0]);
        let tree = fit_decision_tree(&x, &[1, 1, 1], &TreeParams::default(), 0).unwrap();
        assert!(tree.single_class);
        assert_eq!(tree.root, TreeNode::leaf(1.0));
    }

    #[test]
    fn thresholds_within_observed_range_and_min_leaf_respected() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![f64::from(i % 7), f64::from((i * 3) % 5)])
            .collect();
        let y: Vec<u8> = (0..40).map(|i| u8::from((i % 7) + (i * 3) % 5 > 5)).collect();
        let params = TreeParams {
            max_depth: 6,
            min_leaf: 3,
            feature_subsample: 1.0,
        };
        let tree = fit_decision_tree(&x, &y, &params, 0).unwrap();
        tree.root.for_each_split(&mut |f, t| {
            let lo = x.iter().map(|r| r[f]).fold(f64::INFINITY, f64::min);
            let hi = x.iter().map(|r| r[f]).fold(f64::NEG_INFINITY, f64::max);
            assert!(t > lo && t < hi);
        });
        assert!(tree.root.depth() <= 6);
    }

    #[test]
    fn bad_params() {
        let x = column(&[0.0, 1.0]);
        let p = TreeParams {
            min_leaf: 0,
            ..TreeParams::default()
        };
        assert!(fit_decision_tree(&x, &[0, 1], &p, 0).is_err());
        assert_eq!(
            fit_decision_tree(&[], &[], &TreeParams::default(), 0),
            Err(ModelError::EmptyTraining)
        );
    }
}
