use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use partial_copula::basis::BasisSpec;
use partial_copula::cdf::{cdf_from_quantiles, fit_conditional_cdf, QuantileGrid};
use partial_copula::dataset::Dataset;
use partial_copula::qreg::select_penalty;
use partial_copula::simulate::{ks_uniform, standard_normal};
use partial_copula::special::{normal_cdf, normal_quantile};

/// Normal(mu, s) truncated to [0,1]: quantile and distribution function.
struct TruncNormal {
    mu: f64,
    s: f64,
    fa: f64,
    fb: f64,
}

impl TruncNormal {
    fn new(mu: f64, s: f64) -> Self {
        Self { mu, s, fa: normal_cdf(-mu / s), fb: normal_cdf((1.0 - mu) / s) }
    }
    fn quantile(&self, t: f64) -> f64 {
        (self.mu + self.s * normal_quantile(self.fa + t * (self.fb - self.fa))).clamp(0.0, 1.0)
    }
    fn cdf(&self, t: f64) -> f64 {
        (normal_cdf((t - self.mu) / self.s) - self.fa) / (self.fb - self.fa)
    }
}

fn oracle_sup_error(dist: &TruncNormal, m: usize) -> f64 {
    let grid = QuantileGrid::equidistant(0.01, 0.99, m).unwrap();
    let q: Vec<f64> = grid.taus.iter().map(|&t| dist.quantile(t)).collect();
    let (lo, hi) = (dist.quantile(0.01), dist.quantile(0.99));
    (0..=4000)
        .map(|k| lo + (hi - lo) * k as f64 / 4000.0)
        .map(|t| (cdf_from_quantiles(&q, &grid, t).unwrap() - dist.cdf(t)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn oracle_residuals_are_uniform() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let n = 2000;
    let grid = QuantileGrid::default_for(n);
    let u: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = rng.random();
            let dist = TruncNormal::new(0.3 + 0.4 * z, 0.1 + 0.1 * z);
            let x = dist.quantile(rng.random());
            let q: Vec<f64> = grid.taus.iter().map(|&t| dist.quantile(t)).collect();
            cdf_from_quantiles(&q, &grid, x).unwrap()
        })
        .collect();
    let ks = ks_uniform(&u);
    assert!(ks <= 0.04, "KS {ks}");
}

#[test]
fn refining_the_grid_does_not_hurt() {
    for (mu, s) in [(0.5, 0.2), (0.3, 0.05), (0.8, 0.4)] {
        let dist = TruncNormal::new(mu, s);
        let mut last = f64::INFINITY;
        for m in [3, 5, 9, 17, 33, 65] {
            let e = oracle_sup_error(&dist, m);
            assert!(e <= last + 1e-12, "m={m}: {e} > {last}");
            last = e;
        }
    }
}

#[test]
fn fitted_cdf_of_independent_response_is_near_identity() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let n = 1000;
    let raw = Dataset::new(
        (0..n).map(|_| standard_normal(&mut rng)).collect(),
        (0..n).map(|_| rng.random()).collect(),
        vec![(0..n).map(|_| rng.random()).collect()],
    )
    .unwrap();
    let data = raw.to_pseudo_obs().unwrap();
    let basis = BasisSpec::default_for(1);
    let grid = QuantileGrid::default_for(n);
    let w = basis.design(data.z_cols()).unwrap();
    let penalty = select_penalty(&w, &grid.taus, 1.1, 1000, 1).unwrap();
    let model = fit_conditional_cdf(data.x(), data.z_cols(), &basis, &grid, Some(&penalty)).unwrap();
    // every fit carries an intercept, unpenalized, first in beta
    assert!(model.fits.iter().all(|f| f.intercept && f.beta.len() == basis.p()));
    let mut sup = 0.0f64;
    for z in [0.05, 0.3, 0.5, 0.7, 0.95] {
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            sup = sup.max((model.eval(&[z], t).unwrap() - t).abs());
        }
    }
    assert!(sup <= grid.kappa + 0.05, "sup {sup}, kappa {}", grid.kappa);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_interpolant_within_coarseness(
        mu in 0.1f64..0.9,
        s in 0.02f64..0.5,
        m in 2usize..40,
    ) {
        let dist = TruncNormal::new(mu, s);
        let kappa = QuantileGrid::equidistant(0.01, 0.99, m).unwrap().kappa;
        prop_assert!(oracle_sup_error(&dist, m) <= kappa + 1e-12);
    }
}
