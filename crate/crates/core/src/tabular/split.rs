use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Dataset, TabularError};
use crate::rng::seeded;

/// Index sets for one cross-validation fold, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

pub fn kfold_split(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>, TabularError> {
    kfold_indices(dataset.len(), k, seed)
}

/// Shuffles `0..n` and deals it into `k` validation blocks whose sizes differ
/// by at most one; the first `n % k` blocks get the extra index.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>, TabularError> {
    if k < 2 {
        return Err(TabularError::BadFoldCount(format!("k = {k}, need k >= 2")));
    }
    if n < k {
        return Err(TabularError::BadFoldCount(format!(
            "{n} rows cannot fill {k} folds"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeded(seed));

    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut validation = perm[start..start + size].to_vec();
        validation.sort_unstable();
        let mut train: Vec<usize> = perm[..start]
            .iter()
            .chain(&perm[start + size..])
            .copied()
            .collect();
        train.sort_unstable();
        folds.push(Fold { train, validation });
        start += size;
    }
    Ok(folds)
}
