use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_on_rows, TreeNode, TreeParams};
use super::ModelError;
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub feature_subsample: f64,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 10,
            min_leaf: 2,
            feature_subsample: 0.3,
            bootstrap: true,
        }
    }
}

/// Bagged ensemble; the class-1 probability is the mean over trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub n_features: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub single_class: bool,
}

impl ForestModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        sum / self.trees.len() as f64
    }
}

/// Tree `t` draws its bootstrap sample and split subsets from
/// `derive_seed(seed, t)`, so the result does not depend on thread scheduling.
pub fn fit_random_forest(
    x: &[Vec<f64>],
    y: &[u8],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, ModelError> {
    if params.n_trees == 0 {
        return Err(ModelError::InvalidParameter("n_trees must be >= 1".into()));
    }
    if x.is_empty() {
        return Err(ModelError::EmptyTraining);
    }
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        feature_subsample: params.feature_subsample,
    };
    tree_params.validate()?;

    let n = x.len();
    let fitted = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let tree_seed = derive_seed(seed, t as u64);
            let rows: Vec<usize> = if params.bootstrap {
                let mut rng = seeded(derive_seed(tree_seed, u64::MAX));
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_on_rows(x, y, &rows, &tree_params, tree_seed)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let positives = y.iter().filter(|&&l| l == 1).count();
    Ok(ForestModel {
        n_features: fitted[0].n_features,
        trees: fitted.into_iter().map(|t| t.root).collect(),
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        seed,
        single_class: positives == 0 || positives == n,
    })
}
