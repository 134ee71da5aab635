//! Conditional distribution functions interpolated through a grid of fitted
//! conditional quantiles, and the nonparametric residuals they produce.
//!
//! For a grid `tau_1 < ... < tau_m` and predicted quantiles `q_k(z)`, the
//! estimate `F(t | z)` is the piecewise-linear function through the knots
//! `(0, 0), (q_1, tau_1), ..., (q_m, tau_m), (1, 1)`. Predictions are sorted
//! (monotone rearrangement) and clamped into the unit interval before use.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::qreg::{fit_penalized_quantile, PenaltySchedule, QuantileFit};

/// Minimum spacing between consecutive rearranged knots.
pub const KNOT_SEPARATION: f64 = 1e-9;

/// Equidistant grid of quantile levels in `[tau_min, tau_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileGrid {
    pub tau_min: f64,
    pub tau_max: f64,
    pub m: usize,
    pub taus: Vec<f64>,
    /// Coarseness: the common gap between consecutive levels.
    pub kappa: f64,
}

impl QuantileGrid {
    pub fn equidistant(tau_min: f64, tau_max: f64, m: usize) -> Result<Self> {
        if !(tau_min > 0.0 && tau_min < tau_max && tau_max < 1.0) {
            return Err(Error::Domain(format!(
                "need 0 < tau_min < tau_max < 1, got [{tau_min}, {tau_max}]"
            )));
        }
        if m < 2 {
            return Err(Error::Domain(format!("grid needs m >= 2 points, got {m}")));
        }
        let kappa = (tau_max - tau_min) / (m - 1) as f64;
        let mut taus: Vec<f64> = (0..m).map(|k| tau_min + k as f64 * kappa).collect();
        taus[m - 1] = tau_max;
        Ok(Self {
            tau_min,
            tau_max,
            m,
            taus,
            kappa,
        })
    }

    /// Grid on `[0.01, 0.99]` with `ceil(sqrt(n))` points.
    pub fn default_for(n: usize) -> Self {
        Self::equidistant(0.01, 0.99, default_grid_size(n)).expect("valid default grid")
    }
}

pub fn equidistant_grid(tau_min: f64, tau_max: f64, m: usize) -> Result<QuantileGrid> {
    QuantileGrid::equidistant(tau_min, tau_max, m)
}

/// `ceil(sqrt(n))`, at least 2.
pub fn default_grid_size(n: usize) -> usize {
    let mut m = (n as f64).sqrt().ceil() as usize;
    // guard against sqrt rounding for perfect squares
    while m > 0 && (m - 1) * (m - 1) >= n {
        m -= 1;
    }
    while m * m < n {
        m += 1;
    }
    m.max(2)
}

/// How crossing quantile predictions are repaired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rearrangement {
    Sort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalCdfModel {
    pub grid: QuantileGrid,
    pub basis: BasisSpec,
    pub fits: Vec<QuantileFit>,
    pub rearrangement: Rearrangement,
}

impl ConditionalCdfModel {
    /// Raw (unsorted, unclamped) quantile predictions at `z`.
    pub fn raw_quantiles(&self, z: &[f64]) -> Result<Vec<f64>> {
        let h = self.basis.expand(z)?;
        Ok(self.fits.iter().map(|f| crate::qreg::dot(&h, &f.beta)).collect())
    }

    /// Rearranged knot abscissae `q_1 <= ... <= q_m` at `z`.
    pub fn knots(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(rearrange(&self.raw_quantiles(z)?))
    }

    pub fn eval(&self, z: &[f64], t: f64) -> Result<f64> {
        check_t(t)?;
        let knots = self.knots(z)?;
        Ok(interpolate(&knots, &self.grid.taus, t))
    }

    /// Coefficient matrix, one row per quantile level.
    pub fn coefficients(&self) -> Vec<Vec<f64>> {
        self.fits.iter().map(|f| f.beta.clone()).collect()
    }
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain(format!("CDF argument {t} outside [0,1]")))
    }
}

/// Fits one penalized quantile regression per grid level. `z` is column-wise.
pub fn fit_conditional_cdf(
    response: &[f64],
    z: &[Vec<f64>],
    basis: &BasisSpec,
    grid: &QuantileGrid,
    penalty: Option<&PenaltySchedule>,
) -> Result<ConditionalCdfModel> {
    basis.validate()?;
    if response.is_empty() {
        return Err(Error::EmptyData);
    }
    if let Some(v) = response.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("response value {v} outside [0,1]")));
    }
    let w = basis.design_rows(z, response.len())?;
    if w.nrows() != response.len() {
        return Err(Error::Shape(format!(
            "{} responses but {} covariate rows",
            response.len(),
            w.nrows()
        )));
    }
    let fits = grid
        .taus
        .par_iter()
        .map(|&tau| {
            let lambda = penalty.map_or(0.0, |p| p.lambda_for(tau));
            fit_penalized_quantile(&w, response, tau, lambda, basis.intercept).map_err(|e| {
                Error::Fit {
                    tau,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalCdfModel {
        grid: grid.clone(),
        basis: basis.clone(),
        fits,
        rearrangement: Rearrangement::Sort,
    })
}

/// Sorts, clamps into `[0,1]` and spreads values so consecutive entries, and
/// the boundary knots 0 and 1, are at least [`KNOT_SEPARATION`] apart.
pub fn rearrange(raw: &[f64]) -> Vec<f64> {
    let m = raw.len();
    let mut v: Vec<f64> = raw.to_vec();
    v.sort_by(f64::total_cmp);
    let lo = KNOT_SEPARATION;
    let hi = 1.0 - KNOT_SEPARATION;
    for x in v.iter_mut() {
        *x = x.clamp(lo, hi);
    }
    for k in 1..m {
        if v[k] - v[k - 1] < KNOT_SEPARATION {
            v[k] = v[k - 1] + KNOT_SEPARATION;
        }
    }
    if m > 0 && v[m - 1] > hi {
        v[m - 1] = hi;
        for k in (0..m - 1).rev() {
            if v[k + 1] - v[k] < KNOT_SEPARATION {
                v[k] = v[k + 1] - KNOT_SEPARATION;
            }
        }
    }
    v
}

/// Piecewise-linear CDF through `(0,0), (knots_k, taus_k), (1,1)`.
///
/// `knots` must be strictly increasing inside `(0,1)`, as produced by
/// [`rearrange`]. Returns exactly `taus_k` at `t = knots_k`, and the result
/// is monotone in `t` in floating point.
pub fn interpolate(knots: &[f64], taus: &[f64], t: f64) -> f64 {
    debug_assert_eq!(knots.len(), taus.len());
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    // first knot index with knots[k] >= t
    let k = knots.partition_point(|&q| q < t);
    if k < knots.len() && knots[k] == t {
        return taus[k];
    }
    let (q0, t0) = if k == 0 { (0.0, 0.0) } else { (knots[k - 1], taus[k - 1]) };
    let (q1, t1) = if k == knots.len() { (1.0, 1.0) } else { (knots[k], taus[k]) };
    let v = t0 + (t1 - t0) * ((t - q0) / (q1 - q0));
    v.clamp(t0, t1)
}

/// CDF value from externally supplied quantile predictions (for instance the
/// true conditional quantiles of a known model).
pub fn cdf_from_quantiles(raw_quantiles: &[f64], grid: &QuantileGrid, t: f64) -> Result<f64> {
    check_t(t)?;
    if raw_quantiles.len() != grid.m {
        return Err(Error::Shape(format!(
            "{} quantiles for a grid of {} levels",
            raw_quantiles.len(),
            grid.m
        )));
    }
    Ok(interpolate(&rearrange(raw_quantiles), &grid.taus, t))
}

pub fn eval_conditional_cdf(model: &ConditionalCdfModel, z: &[f64], t: f64) -> Result<f64> {
    model.eval(z, t)
}

/// Nonparametric residuals `U1_i = F_X|Z(x_i | z_i)` and `U2_i = F_Y|Z(y_i | z_i)`.
pub fn pit_residuals(
    model_x: &ConditionalCdfModel,
    model_y: &ConditionalCdfModel,
    data: &Dataset,
) -> Result<(Vec<f64>, Vec<f64>)> {
    for m in [model_x, model_y] {
        if m.basis.d() != data.d() {
            return Err(Error::Shape(format!(
                "model expects {} covariates, data has {}",
                m.basis.d(),
                data.d()
            )));
        }
    }
    let mut u1 = Vec::with_capacity(data.n());
    let mut u2 = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let z = data.z_row(i);
        u1.push(model_x.eval(&z, data.x()[i])?);
        u2.push(model_y.eval(&z, data.y()[i])?);
    }
    Ok((u1, u2))
}
