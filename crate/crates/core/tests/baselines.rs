use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use partial_copula::baselines::{gcm_test, npn_test, MeanRegressionSpec};
use partial_copula::basis::BasisSpec;
use partial_copula::dataset::Dataset;
use partial_copula::simulate::standard_normal;

#[test]
fn npn_near_zero_for_independent_pair() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let n = 2000;
    let data = Dataset::new(
        (0..n).map(|_| standard_normal(&mut rng)).collect(),
        (0..n).map(|_| rng.random::<f64>().powi(3)).collect(),
        vec![],
    )
    .unwrap()
    .to_pseudo_obs()
    .unwrap();
    let r = npn_test(&data, 0.05).unwrap().rho[0];
    assert!(r.abs() < 0.08, "{r}");
}

#[test]
fn npn_recovers_gaussian_partial_correlation() {
    // z ~ N(0,1), x = z + e1, y = z + e2 with corr(e1, e2) = 0.5
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    let n = 2000;
    let (mut x, mut y, mut z) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let zi = standard_normal(&mut rng);
        let a = standard_normal(&mut rng);
        let b = standard_normal(&mut rng);
        let e2 = 0.5 * a + 0.75f64.sqrt() * b;
        z.push(zi);
        // monotone marginal distortions do not change the copula
        x.push((zi + a).exp());
        y.push((zi + e2).powi(3));
    }
    let data = Dataset::new(x, y, vec![z]).unwrap().to_pseudo_obs().unwrap();
    let r = npn_test(&data, 0.05).unwrap();
    assert!((r.rho[0] - 0.5).abs() < 0.06, "{}", r.rho[0]);
    assert!(r.reject);
}

fn random_data(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let z: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
    let x = (0..n).map(|i| z[0][i] + standard_normal(&mut rng)).collect();
    let y = (0..n).map(|i| z[1][i] * z[0][i] + standard_normal(&mut rng)).collect();
    Dataset::new(x, y, z).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gcm_ignores_shifts_inside_the_basis_span(
        seed in any::<u64>(),
        coef in proptest::collection::vec(-3.0f64..3.0, 5),
        poly_basis in any::<bool>(),
    ) {
        let data = random_data(seed, 150);
        let basis = if poly_basis { BasisSpec::polynomial(2, 2) } else { BasisSpec::default_for(2) };
        let spec = MeanRegressionSpec::new(basis.clone());
        let w = basis.design(data.z_cols()).unwrap();
        let shift: Vec<f64> = (0..data.n())
            .map(|i| (0..w.ncols()).map(|j| w[(i, j)] * coef[j % coef.len()]).sum())
            .collect();
        let moved = Dataset::new(
            data.x().iter().zip(&shift).map(|(a, s)| a + s).collect(),
            data.y().iter().zip(&shift).map(|(a, s)| a - 2.0 * s).collect(),
            data.z_cols().to_vec(),
        ).unwrap();
        let a = gcm_test(&data, &spec, &spec, 0.05).unwrap().statistic;
        let b = gcm_test(&moved, &spec, &spec, 0.05).unwrap().statistic;
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn npn_depends_on_ranks_only(seed in any::<u64>()) {
        let data = random_data(seed, 120);
        let moved = data.clone().map_x(|v| v.powi(3)).map_y(|v| v.atan()).map_z(1, f64::exp);
        let a = npn_test(&data.to_pseudo_obs().unwrap(), 0.05).unwrap();
        let b = npn_test(&moved.to_pseudo_obs().unwrap(), 0.05).unwrap();
        prop_assert_eq!(a, b);
    }
}
