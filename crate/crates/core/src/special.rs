//! Chi-squared and normal distribution functions used for p-values and
//! critical values, on top of `statrs`.

use std::f64::consts::SQRT_2;

use statrs::function::erf::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::{gamma_lr, gamma_ur};

pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(0.5 * df, 0.5 * x)
    }
}

/// Upper tail `P(chi2_df > x)`, computed directly rather than as `1 - cdf`.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(0.5 * df, 0.5 * x)
    }
}

/// `(1 - alpha)`-quantile of chi-squared with `df` degrees of freedom, i.e.
/// the `x` with `chi2_sf(x) = alpha`. Bisection on the upper tail keeps small
/// `alpha` accurate.
pub fn chi2_upper_quantile(alpha: f64, df: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0);
    let mut lo = 0.0;
    let mut hi = df.max(1.0);
    while chi2_sf(hi, df) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_sf(mid, df) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Two-sided tail `P(|N(0,1)| > |x|)`.
pub fn normal_two_sided_p(x: f64) -> f64 {
    erfc(x.abs() / SQRT_2)
}

pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile needs p in (0,1)");
    -SQRT_2 * erfc_inv(2.0 * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    /// Composite Gauss-Legendre on [a,b] split into `pieces` panels.
    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let h = (b - a) / pieces as f64;
        (0..pieces)
            .map(|k| {
                let lo = a + k as f64 * h;
                let mid = lo + 0.5 * h;
                NODES
                    .iter()
                    .zip(WEIGHTS)
                    .map(|(x, w)| w * f(mid + 0.5 * h * x))
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum()
    }

    #[test]
    fn chi2_sf_against_density_quadrature() {
        for &df in &[1.0, 2.0, 4.0, 9.0, 25.0] {
            let ln_norm = -(0.5 * df) * 2f64.ln() - ln_gamma(0.5 * df);
            let dens = |x: f64| {
                if x <= 0.0 {
                    0.0
                } else {
                    (ln_norm + (0.5 * df - 1.0) * x.ln() - 0.5 * x).exp()
                }
            };
            for &x in &[0.5f64, 2.0, 3.8415, 10.0, 30.0] {
                // sf = 1 - int_0^x, with a substitution u = sqrt(t) for df = 1
                let cdf = if df == 1.0 {
                    integrate(|u| 2.0 * u * dens(u * u), 0.0, x.sqrt(), 4000)
                } else {
                    integrate(dens, 0.0, x, 4000)
                };
                assert!((chi2_sf(x, df) - (1.0 - cdf)).abs() < 1e-10, "df={df} x={x}");
            }
        }
    }

    #[test]
    fn chi2_one_df_critical_value() {
        assert!((chi2_sf(3.8415, 1.0) - 0.05).abs() < 1e-3);
        assert!((chi2_upper_quantile(0.05, 1.0) - 3.841_458_820_694_124).abs() < 1e-9);
        assert!((chi2_upper_quantile(0.05, 9.0) - 16.918_977_604_620_45).abs() < 1e-8);
        assert_eq!(chi2_sf(0.0, 4.0), 1.0);
    }

    #[test]
    fn normal_functions() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-11);
        assert!((normal_two_sided_p(1.959_963_984_540_054) - 0.05).abs() < 1e-11);
        for &p in &[1e-10, 0.001, 0.02, 0.3, 0.5, 0.77, 0.99, 1.0 - 1e-9] {
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-10 * p.max(1e-3), "p={p}");
        }
    }
}
