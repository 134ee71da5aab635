use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::phi::PhiFamily;
use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::special::{chi2_sf, chi2_upper_quantile};

/// Eigenvalues of `Sigma` below this make the family degenerate.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Outcome of a conditional independence test.
///
/// For the generalized-correlation test `statistic` is `T_n` and `n_t_n` is
/// compared with the chi-squared(`df`) distribution. Baselines fill the same
/// fields with their scalar statistic and its square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: String,
    pub statistic: f64,
    pub n_t_n: f64,
    pub df: usize,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub q: usize,
    pub n: usize,
    pub seed: Option<u64>,
    /// Row-major `q x q`.
    pub rho: Vec<f64>,
    /// Row-major `q x q`.
    pub sigma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_x: Option<BasisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_y: Option<BasisSpec>,
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// `Sigma_ks = int_0^1 phi_k phi_s`, by exact piecewise integration.
pub fn sigma_matrix(family: &PhiFamily) -> DMatrix<f64> {
    let q = family.q();
    let polys: Vec<_> = family.functions.iter().map(|f| f.poly()).collect();
    let mut sigma = DMatrix::zeros(q, q);
    for k in 0..q {
        for s in k..q {
            let v = polys[k].mul(&polys[s]).integral();
            sigma[(k, s)] = v;
            sigma[(s, k)] = v;
        }
    }
    sigma
}

/// `(1/n) sum_i phi(U1_i) phi(U2_i)^T`.
pub fn rho_hat(u1: &[f64], u2: &[f64], family: &PhiFamily) -> Result<DMatrix<f64>> {
    if u1.len() != u2.len() {
        return Err(Error::Shape(format!(
            "residual vectors have lengths {} and {}",
            u1.len(),
            u2.len()
        )));
    }
    if u1.is_empty() {
        return Err(Error::EmptyData);
    }
    if let Some(v) = u1.iter().chain(u2).find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("residual {v} outside [0,1]")));
    }
    let q = family.q();
    let mut acc = DMatrix::zeros(q, q);
    let mut a = vec![0.0; q];
    let mut b = vec![0.0; q];
    for (&x, &y) in u1.iter().zip(u2) {
        family.eval_all(x, &mut a);
        if a.iter().all(|v| *v == 0.0) {
            continue;
        }
        family.eval_all(y, &mut b);
        for k in 0..q {
            if a[k] != 0.0 {
                for s in 0..q {
                    acc[(k, s)] += a[k] * b[s];
                }
            }
        }
    }
    Ok(acc / u1.len() as f64)
}

/// Symmetric inverse square root via eigendecomposition.
pub fn inverse_sqrt(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !sigma.is_square() {
        return Err(Error::Shape("sigma must be square".into()));
    }
    let asym = (sigma - sigma.transpose()).amax();
    if asym > 1e-10 * sigma.amax().max(1.0) {
        return Err(Error::Degenerate("sigma is not symmetric".into()));
    }
    let eig = sigma.clone().symmetric_eigen();
    if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if !(min > EIGEN_FLOOR) {
            return Err(Error::Degenerate(format!(
                "sigma is not positive definite (smallest eigenvalue {min:.3e}); \
                 the phi functions are linearly dependent"
            )));
        }
    }
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(v * d * v.transpose())
}

/// `T_n = |Sigma^{-1/2} rho Sigma^{-1/2}|_F^2`, referred to chi-squared with
/// `q^2` degrees of freedom after scaling by `n`.
pub fn chi_square_statistic(
    rho: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    n: usize,
    alpha: f64,
) -> Result<TestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0,1)")));
    }
    if rho.shape() != sigma.shape() || !rho.is_square() {
        return Err(Error::Shape(format!(
            "rho is {:?}, sigma is {:?}",
            rho.shape(),
            sigma.shape()
        )));
    }
    let q = rho.nrows();
    let s = inverse_sqrt(sigma)?;
    let whitened = &s * rho * &s;
    let t_n = whitened.iter().map(|v| v * v).sum::<f64>();
    let n_t_n = n as f64 * t_n;
    let df = q * q;
    let p_value = chi2_sf(n_t_n, df as f64);
    let critical = chi2_upper_quantile(alpha, df as f64);
    Ok(TestResult {
        method: "pc".into(),
        statistic: t_n,
        n_t_n,
        df,
        p_value,
        reject: n_t_n > critical,
        alpha,
        q,
        n,
        seed: None,
        rho: row_major(rho),
        sigma: row_major(sigma),
        basis_x: None,
        basis_y: None,
    })
}
