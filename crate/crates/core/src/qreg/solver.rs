//! Primal-dual interior point method for penalized quantile regression.
//!
//! The penalty `lambda * |beta_j|` is written as two pseudo-observations with
//! response 0 and design rows `+lambda e_j` and `-lambda e_j`, whose check
//! losses add up to `lambda |beta_j|`. The resulting unpenalized quantile
//! regression is solved through its bounded linear-programming dual
//!
//! ```text
//!     max  y^T a   subject to   W^T a = (1 - tau) W^T 1,   0 <= a <= 1
//! ```
//!
//! with Mehrotra predictor-corrector steps. The dual multipliers of the
//! equality constraint are `-beta`.

use nalgebra::{DMatrix, DVector};

use super::{check, check_level, penalized_objective, QuantileFit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop once the complementarity gap is below `tol * (1 + |objective|)`.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tol: 1e-11,
        }
    }
}

/// Accepted when the iteration stalls before reaching `tol`.
const STALL_TOL: f64 = 1e-8;
const STEP_FRACTION: f64 = 0.99995;
/// Coefficients this small are tried at exactly zero after the solve.
const POLISH_ZERO: f64 = 1e-7;

/// Minimizes `sum_i L_tau(x_i - W_i^T beta) + lambda * |beta_pen|_1`, where
/// every coefficient except an intercept in column 0 is penalized.
pub fn fit_penalized_quantile(
    w: &DMatrix<f64>,
    x: &[f64],
    tau: f64,
    lambda: f64,
    intercept: bool,
) -> Result<QuantileFit> {
    fit_with_options(w, x, tau, lambda, intercept, SolverOptions::default())
}

pub fn fit_with_options(
    w: &DMatrix<f64>,
    x: &[f64],
    tau: f64,
    lambda: f64,
    intercept: bool,
    opts: SolverOptions,
) -> Result<QuantileFit> {
    check_level(tau)?;
    let (n, p) = w.shape();
    if n == 0 || p == 0 {
        return Err(Error::Shape(format!("empty design {n}x{p}")));
    }
    if x.len() != n {
        return Err(Error::Shape(format!(
            "design has {n} rows, response has {}",
            x.len()
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("penalty {lambda} must be finite and >= 0")));
    }
    if w.iter().chain(x).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite value in design or response".into()));
    }

    let problem = Augmented::new(w, x, lambda, intercept);
    let state = interior_point(&problem, tau, opts);

    let mut beta: Vec<f64> = state.y.iter().map(|v| -v).collect();
    let mut objective = penalized_objective(w, x, tau, lambda, intercept, &beta);
    // Snap near-zero penalized coefficients when that does not hurt.
    if lambda > 0.0 {
        for j in usize::from(intercept)..p {
            if beta[j] != 0.0 && beta[j].abs() < POLISH_ZERO {
                let old = beta[j];
                beta[j] = 0.0;
                let trial = penalized_objective(w, x, tau, lambda, intercept, &beta);
                if trial <= objective {
                    objective = trial;
                } else {
                    beta[j] = old;
                }
            }
        }
    }

    let fit = QuantileFit {
        tau,
        beta,
        lambda,
        objective,
        intercept,
        iterations: state.iterations,
        converged: state.converged,
    };
    if fit.converged {
        Ok(fit)
    } else {
        Err(Error::NonConvergence {
            iterations: state.iterations,
            gap: state.rel_gap,
            best: Box::new(fit),
        })
    }
}

/// Row-major design with penalty pseudo-observations appended.
struct Augmented {
    rows: Vec<f64>,
    resp: Vec<f64>,
    n: usize,
    p: usize,
}

impl Augmented {
    fn new(w: &DMatrix<f64>, x: &[f64], lambda: f64, intercept: bool) -> Self {
        let (n, p) = w.shape();
        let penalized: Vec<usize> = if lambda > 0.0 {
            (usize::from(intercept)..p).collect()
        } else {
            Vec::new()
        };
        let total = n + 2 * penalized.len();
        let mut rows = Vec::with_capacity(total * p);
        for i in 0..n {
            rows.extend((0..p).map(|j| w[(i, j)]));
        }
        let mut resp = x.to_vec();
        for &j in &penalized {
            // Beyond sum_i |W_ij| the loss cannot compete with the penalty, so
            // beta_j = 0 either way; capping keeps the system well scaled.
            let lipschitz: f64 = (0..n).map(|i| w[(i, j)].abs()).sum();
            let weight = lambda.min(lipschitz.max(f64::MIN_POSITIVE));
            for sign in [1.0, -1.0] {
                let start = rows.len();
                rows.resize(start + p, 0.0);
                rows[start + j] = sign * weight;
                resp.push(0.0);
            }
        }
        Self {
            rows,
            resp,
            n: total,
            p,
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.p..(i + 1) * self.p]
    }

    /// `W y`
    fn mul(&self, y: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = super::dot(self.row(i), y);
        }
    }

    /// `W^T a`
    fn tmul(&self, a: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &ai) in a.iter().enumerate() {
            if ai != 0.0 {
                for (o, &wij) in out.iter_mut().zip(self.row(i)) {
                    *o += wij * ai;
                }
            }
        }
    }

    /// `W^T diag(theta) W` plus a relative ridge.
    fn gram(&self, theta: &[f64]) -> DMatrix<f64> {
        let p = self.p;
        let mut g = DMatrix::<f64>::zeros(p, p);
        for (i, &t) in theta.iter().enumerate() {
            let r = self.row(i);
            for j in 0..p {
                let v = t * r[j];
                if v != 0.0 {
                    for k in j..p {
                        g[(j, k)] += v * r[k];
                    }
                }
            }
        }
        let scale = (0..p).map(|j| g[(j, j)]).fold(0.0, f64::max).max(1e-300);
        for j in 0..p {
            g[(j, j)] += 1e-13 * scale;
            for k in 0..j {
                g[(j, k)] = g[(k, j)];
            }
        }
        g
    }

    fn loss(&self, beta: &[f64], tau: f64) -> f64 {
        (0..self.n)
            .map(|i| check(self.resp[i] - super::dot(self.row(i), beta), tau))
            .sum()
    }
}

struct IpmState {
    y: Vec<f64>,
    iterations: usize,
    converged: bool,
    rel_gap: f64,
}

/// Solves `W^T diag(theta) W dy = rhs` by Cholesky, with an eigen fallback.
fn solve_normal(g: DMatrix<f64>, rhs: &[f64]) -> Vec<f64> {
    let rhs = DVector::from_column_slice(rhs);
    match g.clone().cholesky() {
        Some(ch) => ch.solve(&rhs).iter().copied().collect(),
        None => {
            let eig = g.symmetric_eigen();
            let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let coeffs = eig.eigenvectors.transpose() * rhs;
            let scaled = DVector::from_iterator(
                coeffs.len(),
                coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, &l)| {
                    if l > 1e-14 * top {
                        c / l
                    } else {
                        0.0
                    }
                }),
            );
            (eig.eigenvectors * scaled).iter().copied().collect()
        }
    }
}

fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&x, &d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

fn interior_point(prob: &Augmented, tau: f64, opts: SolverOptions) -> IpmState {
    let n = prob.n;
    let p = prob.p;
    let c: Vec<f64> = prob.resp.iter().map(|v| -v).collect();

    // Primal start a = 1 - tau satisfies W^T a = b exactly.
    let mut a = vec![1.0 - tau; n];
    let mut s = vec![tau; n];
    let mut b = vec![0.0; p];
    prob.tmul(&a, &mut b);

    // Dual start from least squares: y = -beta_ls.
    let mut y = {
        let ones = vec![1.0; n];
        let g = prob.gram(&ones);
        let mut wx = vec![0.0; p];
        prob.tmul(&prob.resp, &mut wx);
        solve_normal(g, &wx).into_iter().map(|v| -v).collect::<Vec<_>>()
    };
    let mut wy = vec![0.0; n];
    prob.mul(&y, &mut wy);
    let r: Vec<f64> = (0..n).map(|i| c[i] - wy[i]).collect();
    let shift = 0.5 * r.iter().map(|v| v.abs()).sum::<f64>() / n as f64 + 1e-3;
    let mut z: Vec<f64> = r.iter().map(|&v| v.max(0.0) + shift).collect();
    let mut w: Vec<f64> = r.iter().map(|&v| (-v).max(0.0) + shift).collect();

    let mut best_y = y.clone();
    let mut best_gap = f64::INFINITY;
    let mut stalled = 0;

    let mut theta = vec![0.0; n];
    let mut rp = vec![0.0; p];
    let mut rd = vec![0.0; n];
    let mut rho = vec![0.0; n];
    let mut tmp_p = vec![0.0; p];
    let mut dx = vec![0.0; n];
    let mut dz = vec![0.0; n];
    let mut dw = vec![0.0; n];
    let mut ds = vec![0.0; n];
    let mut rxz = vec![0.0; n];
    let mut rsw = vec![0.0; n];
    let mut ru = vec![0.0; n];

    for iter in 0..opts.max_iterations {
        let beta: Vec<f64> = y.iter().map(|v| -v).collect();
        let objective = prob.loss(&beta, tau);
        let gap: f64 = (0..n).map(|i| a[i] * z[i] + s[i] * w[i]).sum();
        let rel_gap = gap / (1.0 + objective.abs());
        if rel_gap < best_gap {
            best_gap = rel_gap;
            best_y.clone_from(&y);
        }
        if rel_gap <= opts.tol {
            return IpmState {
                y,
                iterations: iter,
                converged: true,
                rel_gap,
            };
        }
        if stalled >= 5 {
            return IpmState {
                y: best_y,
                iterations: iter,
                converged: best_gap <= STALL_TOL,
                rel_gap: best_gap,
            };
        }
        let mu = gap / (2 * n) as f64;

        // residuals of W^T a = b, a + s = 1, W y + z - w = c
        prob.tmul(&a, &mut rp);
        for j in 0..p {
            rp[j] = b[j] - rp[j];
        }
        prob.mul(&y, &mut wy);
        for i in 0..n {
            rd[i] = c[i] - wy[i] - z[i] + w[i];
            ru[i] = 1.0 - a[i] - s[i];
            theta[i] = 1.0 / (z[i] / a[i] + w[i] / s[i]);
        }
        let gram = prob.gram(&theta);
        let chol = gram.clone().cholesky();

        let mut direction = |rxz: &[f64], rsw: &[f64], dx: &mut [f64], dz: &mut [f64], dw: &mut [f64], ds: &mut [f64]| {
            for i in 0..n {
                let rsw_i = rsw[i] - w[i] * ru[i];
                rho[i] = rd[i] - rxz[i] / a[i] + rsw_i / s[i];
            }
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                rhs[i] = theta[i] * rho[i];
            }
            prob.tmul(&rhs, &mut tmp_p);
            for j in 0..p {
                tmp_p[j] += rp[j];
            }
            let dy = match &chol {
                Some(ch) => ch
                    .solve(&DVector::from_column_slice(&tmp_p))
                    .iter()
                    .copied()
                    .collect(),
                None => solve_normal(gram.clone(), &tmp_p),
            };
            prob.mul(&dy, dx);
            for i in 0..n {
                dx[i] = theta[i] * (dx[i] - rho[i]);
                dz[i] = (rxz[i] - z[i] * dx[i]) / a[i];
                let rsw_i = rsw[i] - w[i] * ru[i];
                dw[i] = (rsw_i + w[i] * dx[i]) / s[i];
                ds[i] = ru[i] - dx[i];
            }
            dy
        };

        // predictor
        for i in 0..n {
            rxz[i] = -a[i] * z[i];
            rsw[i] = -s[i] * w[i];
        }
        let _ = direction(&rxz, &rsw, &mut dx, &mut dz, &mut dw, &mut ds);
        let ap = max_step(&a, &dx).min(max_step(&s, &ds)).min(1.0);
        let ad = max_step(&z, &dz).min(max_step(&w, &dw)).min(1.0);
        let mu_aff: f64 = (0..n)
            .map(|i| {
                (a[i] + ap * dx[i]) * (z[i] + ad * dz[i]) + (s[i] + ap * ds[i]) * (w[i] + ad * dw[i])
            })
            .sum::<f64>()
            / (2 * n) as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        for i in 0..n {
            rxz[i] = sigma * mu - a[i] * z[i] - dx[i] * dz[i];
            rsw[i] = sigma * mu - s[i] * w[i] - ds[i] * dw[i];
        }
        let dy = direction(&rxz, &rsw, &mut dx, &mut dz, &mut dw, &mut ds);
        let ap = (STEP_FRACTION * max_step(&a, &dx).min(max_step(&s, &ds))).min(1.0);
        let ad = (STEP_FRACTION * max_step(&z, &dz).min(max_step(&w, &dw))).min(1.0);
        if !(ap > 0.0 && ad > 0.0) || dy.iter().any(|v| !v.is_finite()) {
            stalled = usize::MAX;
            continue;
        }
        if ap < 1e-10 && ad < 1e-10 {
            stalled += 1;
        }
        for i in 0..n {
            a[i] += ap * dx[i];
            s[i] += ap * ds[i];
            z[i] += ad * dz[i];
            w[i] += ad * dw[i];
        }
        for j in 0..p {
            y[j] += ad * dy[j];
        }
        if a.iter().chain(&s).chain(&z).chain(&w).any(|v| !(*v > 0.0)) {
            stalled = usize::MAX;
        }
    }
    IpmState {
        y: best_y,
        iterations: opts.max_iterations,
        converged: best_gap <= STALL_TOL,
        rel_gap: best_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn empirical_quantile_interval(x: &[f64], tau: f64) -> (f64, f64) {
        // minimizers of sum L_tau(x_i - b) form [x_(k), x_(k')]
        let mut v = x.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let k = (tau * n).ceil() as usize;
        let lo = v[k.max(1) - 1];
        let hi = if (tau * n).fract() == 0.0 { v[k.min(v.len() - 1)] } else { lo };
        (lo, hi)
    }

    #[test]
    fn intercept_only_gives_empirical_quantile() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &tau in &[0.1, 0.25, 0.5, 0.73, 0.9] {
            let x: Vec<f64> = (0..37).map(|_| rng.random::<f64>()).collect();
            let w = DMatrix::from_element(x.len(), 1, 1.0);
            let fit = fit_penalized_quantile(&w, &x, tau, 0.3, true).unwrap();
            let (lo, hi) = empirical_quantile_interval(&x, tau);
            assert!(fit.beta[0] >= lo - 1e-7 && fit.beta[0] <= hi + 1e-7, "tau={tau}: {} not in [{lo},{hi}]", fit.beta[0]);
        }
    }

    #[test]
    fn huge_penalty_zeroes_slopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40;
        let mut w = DMatrix::from_element(n, 3, 1.0);
        let mut x = Vec::new();
        for i in 0..n {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            w[(i, 1)] = a;
            w[(i, 2)] = b;
            x.push(0.3 + 2.0 * a - b + 0.1 * rng.random::<f64>());
        }
        let fit = fit_penalized_quantile(&w, &x, 0.7, 1e9, true).unwrap();
        assert_eq!(fit.beta[1], 0.0);
        assert_eq!(fit.beta[2], 0.0);
        let (lo, hi) = empirical_quantile_interval(&x, 0.7);
        assert!(fit.beta[0] >= lo - 1e-7 && fit.beta[0] <= hi + 1e-7);
    }

    #[test]
    fn constant_response() {
        let n = 25;
        let mut w = DMatrix::from_element(n, 2, 1.0);
        for i in 0..n {
            w[(i, 1)] = i as f64 / n as f64;
        }
        let x = vec![0.4; n];
        for &tau in &[0.05, 0.5, 0.95] {
            let fit = fit_penalized_quantile(&w, &x, tau, 0.01, true).unwrap();
            for i in 0..n {
                let pred = fit.beta[0] + fit.beta[1] * w[(i, 1)];
                assert!((pred - 0.4).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let w = DMatrix::from_element(3, 1, 1.0);
        assert!(matches!(fit_penalized_quantile(&w, &[1.0, 2.0], 0.5, 0.0, true), Err(Error::Shape(_))));
        assert!(matches!(fit_penalized_quantile(&w, &[1.0, 2.0, 3.0], 1.2, 0.0, true), Err(Error::Domain(_))));
        assert!(matches!(fit_penalized_quantile(&w, &[1.0, 2.0, 3.0], 0.5, -1.0, true), Err(Error::Domain(_))));
    }

    #[test]
    fn iteration_budget_exhaustion_reports_best_iterate() {
        let w = DMatrix::from_fn(30, 2, |i, j| if j == 0 { 1.0 } else { i as f64 / 30.0 });
        let x: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64 / 11.0).collect();
        let opts = SolverOptions { max_iterations: 1, tol: 1e-11 };
        match fit_with_options(&w, &x, 0.5, 0.0, true, opts) {
            Err(Error::NonConvergence { best, .. }) => assert_eq!(best.beta.len(), 2),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
