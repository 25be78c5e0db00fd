//! Determinantal diversity of a counterfactual set.
//!
//! `K_ij = 1 / (1 + dist(X_i, X_j))` and the diversity is `det(K)`. Because
//! the distances are L1/Hamming sums and `1/(1+t)` is completely monotone, `K`
//! is positive semidefinite with a unit diagonal, so `det(K)` lies in
//! `[0, 1]`: 1 for a single counterfactual, 0 when two coincide, and larger
//! for more mutually distant sets.

use super::Metric;

pub fn kernel_matrix(cfs: &[&[f64]], metric: &Metric) -> Vec<Vec<f64>> {
    let k = cfs.len();
    let mut kernel = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let v = 1.0 / (1.0 + metric.distance(cfs[i], cfs[j]));
            kernel[i][j] = v;
            kernel[j][i] = v;
        }
    }
    kernel
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("non-empty range");
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for row in (col + 1)..n {
            let factor = m[row][col] / p;
            if factor != 0.0 {
                for c in col..n {
                    m[row][c] -= factor * m[col][c];
                }
            }
        }
    }
    det
}

pub fn dpp_diversity(cfs: &[&[f64]], metric: &Metric) -> f64 {
    if cfs.len() <= 1 {
        return 1.0;
    }
    // PSD with unit diagonal; clamp round-off just outside [0, 1].
    determinant(kernel_matrix(cfs, metric)).clamp(0.0, 1.0)
}
