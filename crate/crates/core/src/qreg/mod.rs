//! L1-penalized linear quantile regression and its data-driven penalty level.

mod penalty;
mod solver;

pub use penalty::{select_penalty, PenaltySchedule};
pub use solver::{fit_penalized_quantile, SolverOptions};

use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::error::{Error, Result};

/// Check function `L_tau(u) = u (tau - 1(u < 0))`.
pub fn pinball_loss(u: f64, tau: f64) -> Result<f64> {
    check_level(tau)?;
    Ok(check(u, tau))
}

#[inline]
pub(crate) fn check(u: f64, tau: f64) -> f64 {
    if u < 0.0 {
        u * (tau - 1.0)
    } else {
        u * tau
    }
}

pub(crate) fn check_level(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("quantile level {tau} outside (0,1)")))
    }
}

/// One fitted quantile level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileFit {
    pub tau: f64,
    pub beta: Vec<f64>,
    pub lambda: f64,
    /// `sum_i L_tau(x_i - W_i^T beta) + lambda * |beta_penalized|_1`.
    pub objective: f64,
    /// Whether `beta[0]` is an unpenalized intercept.
    pub intercept: bool,
    pub iterations: usize,
    pub converged: bool,
}

impl QuantileFit {
    /// `h(z)^T beta`. No clamping.
    pub fn predict(&self, spec: &BasisSpec, z: &[f64]) -> Result<f64> {
        if spec.p() != self.beta.len() {
            return Err(Error::Shape(format!(
                "basis dimension {} does not match {} coefficients",
                spec.p(),
                self.beta.len()
            )));
        }
        let h = spec.expand(z)?;
        Ok(dot(&h, &self.beta))
    }
}

pub fn predict_quantile(fit: &QuantileFit, spec: &BasisSpec, z: &[f64]) -> Result<f64> {
    fit.predict(spec, z)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Penalized check-loss objective, with `beta[0]` unpenalized when `intercept`.
pub fn penalized_objective(
    w: &nalgebra::DMatrix<f64>,
    x: &[f64],
    tau: f64,
    lambda: f64,
    intercept: bool,
    beta: &[f64],
) -> f64 {
    let n = w.nrows();
    let p = w.ncols();
    let mut loss = 0.0;
    for i in 0..n {
        let mut fit = 0.0;
        for j in 0..p {
            fit += w[(i, j)] * beta[j];
        }
        loss += check(x[i] - fit, tau);
    }
    let start = usize::from(intercept);
    let l1: f64 = beta[start..].iter().map(|b| b.abs()).sum();
    if lambda > 0.0 {
        loss + lambda * l1
    } else {
        loss
    }
}
