//! Helpers shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use partial_copula::qreg::penalized_objective;

/// Exact minimum of a tiny penalized check-loss problem. The objective is
/// convex and piecewise linear, so its minimum is attained where `p`
/// independent kinks (`w_i beta = x_i` or `beta_j = 0`) meet.
pub fn vertex_minimum(w: &DMatrix<f64>, x: &[f64], tau: f64, lambda: f64, intercept: bool) -> f64 {
    let (n, p) = w.shape();
    let mut rows: Vec<(Vec<f64>, f64)> =
        (0..n).map(|i| (w.row(i).iter().copied().collect(), x[i])).collect();
    if lambda > 0.0 {
        for j in usize::from(intercept)..p {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            rows.push((e, 0.0));
        }
    }
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..p).collect();
    loop {
        let a = DMatrix::from_fn(p, p, |r, c| rows[idx[r]].0[c]);
        let b = DVector::from_iterator(p, idx.iter().map(|&r| rows[r].1));
        if a.determinant().abs() > 1e-10 {
            if let Some(beta) = a.lu().solve(&b) {
                let beta: Vec<f64> = beta.iter().copied().collect();
                best = best.min(penalized_objective(w, x, tau, lambda, intercept, &beta));
            }
        }
        // next p-subset in lexicographic order
        let total = rows.len();
        let mut k = p;
        while k > 0 && idx[k - 1] == total - p + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        for j in k..p {
            idx[j] = idx[j - 1] + 1;
        }
    }
    best
}
