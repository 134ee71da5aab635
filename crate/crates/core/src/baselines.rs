//! Reference tests: the generalised covariance measure (GCM) on
//! least-squares residuals and the nonparanormal partial correlation test.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gencorr::TestResult;
use crate::special::{normal_quantile, normal_two_sided_p};

/// Conditional mean model `E[x | z] = h(z)^T beta`, fitted by (ridge) least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRegressionSpec {
    pub basis: BasisSpec,
    #[serde(default)]
    pub ridge: f64,
}

impl MeanRegressionSpec {
    pub fn new(basis: BasisSpec) -> Self {
        Self { basis, ridge: 0.0 }
    }
}

/// Relative singular value cutoff for the least-squares solves.
const RANK_TOL: f64 = 1e-10;

/// Least-squares residuals `v - W beta_hat`. Rank-deficient designs are
/// handled by the minimum-norm solution, which leaves residuals unchanged.
fn ls_residuals(w: &DMatrix<f64>, v: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let b = DVector::from_column_slice(v);
    let beta = if ridge > 0.0 {
        let p = w.ncols();
        let mut gram = w.transpose() * w;
        for j in 0..p {
            gram[(j, j)] += ridge;
        }
        gram.cholesky()
            .ok_or_else(|| Error::Degenerate("ridge system is not positive definite".into()))?
            .solve(&(w.transpose() * &b))
    } else {
        let svd = w.clone().svd(true, true);
        let smax = svd.singular_values.max();
        svd.solve(&b, RANK_TOL * smax.max(f64::MIN_POSITIVE))
            .map_err(|e| Error::Degenerate(format!("least squares failed: {e}")))?
    };
    Ok((b - w * beta).iter().copied().collect())
}

fn baseline_result(method: &str, t: f64, n: usize, alpha: f64) -> TestResult {
    let p_value = normal_two_sided_p(t);
    TestResult {
        method: method.into(),
        statistic: t,
        n_t_n: t * t,
        df: 1,
        p_value,
        reject: p_value < alpha,
        alpha,
        q: 0,
        n,
        seed: None,
        rho: Vec::new(),
        sigma: Vec::new(),
        basis_x: None,
        basis_y: None,
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha {alpha} outside (0,1)")))
    }
}

/// Normalized covariance of the products of mean-regression residuals,
/// `T = sqrt(n) mean(P) / sqrt(mean(P^2) - mean(P)^2)`, with a two-sided
/// normal p-value. `x` and `y` are used as given; `z` must lie in `[0,1]`.
pub fn gcm_test(
    data: &Dataset,
    spec_x: &MeanRegressionSpec,
    spec_y: &MeanRegressionSpec,
    alpha: f64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let n = data.n();
    let mut resid = Vec::with_capacity(2);
    for (spec, v) in [(spec_x, data.x()), (spec_y, data.y())] {
        spec.basis.validate()?;
        if !(spec.ridge >= 0.0) {
            return Err(Error::Domain(format!("ridge {} must be >= 0", spec.ridge)));
        }
        let w = spec.basis.design_rows(data.z_cols(), n)?;
        if n <= w.ncols() {
            return Err(Error::Shape(format!(
                "mean regression needs n > p, got n={n}, p={}",
                w.ncols()
            )));
        }
        resid.push(ls_residuals(&w, v, spec.ridge)?);
    }
    let nf = n as f64;
    let prod: Vec<f64> = resid[0].iter().zip(&resid[1]).map(|(a, b)| a * b).collect();
    let mean = prod.iter().sum::<f64>() / nf;
    let mean_sq = prod.iter().map(|p| p * p).sum::<f64>() / nf;
    let var = mean_sq - mean * mean;
    if !(var > 1e-12 * mean_sq) {
        return Err(Error::Degenerate(
            "residual products have zero variance; GCM statistic undefined".into(),
        ));
    }
    let mut out = baseline_result("gcm", nf.sqrt() * mean / var.sqrt(), n, alpha);
    out.basis_x = Some(spec_x.basis.clone());
    out.basis_y = Some(spec_y.basis.clone());
    Ok(out)
}

/// Partial correlation of the normal scores of `x` and `y` given those of
/// `z`, tested with the Fisher transform `sqrt(n - d - 3) atanh(r)`.
pub fn npn_test(data: &Dataset, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    if !data.is_transformed() {
        return Err(Error::Domain(
            "npn_test needs pseudo-observations; call to_pseudo_obs first".into(),
        ));
    }
    let (n, d) = (data.n(), data.d());
    if n <= d + 3 {
        return Err(Error::Shape(format!("npn_test needs n > d + 3, got n={n}, d={d}")));
    }
    let scores = |v: &[f64]| v.iter().map(|&u| normal_quantile(u)).collect::<Vec<_>>();
    let w = DMatrix::from_fn(n, d + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            normal_quantile(data.z_col(j - 1)[i])
        }
    });
    let svd = w.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOL * smax) {
        return Err(Error::Degenerate("conditioning design is singular".into()));
    }
    let r1 = ls_residuals(&w, &scores(data.x()), 0.0)?;
    let r2 = ls_residuals(&w, &scores(data.y()), 0.0)?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let denom = (dot(&r1, &r1) * dot(&r2, &r2)).sqrt();
    if !(denom > 0.0) {
        return Err(Error::Degenerate("a residual vector is identically zero".into()));
    }
    let r = (dot(&r1, &r2) / denom).clamp(-1.0, 1.0);
    let t = ((n - d - 3) as f64).sqrt() * r.atanh();
    let mut out = baseline_result("npn", t, n, alpha);
    // partial correlation recorded as the 1x1 "rho"
    out.rho = vec![r];
    Ok(out)
}
