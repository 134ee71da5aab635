//! Generalized correlation of nonparametric residuals and the partial copula
//! test built on it.

mod phi;
mod stat;

pub use phi::{build_trimmed_spearman, PhiFamily, PiecewisePoly, TrimmedSpearman, Trimming};
pub use stat::{chi_square_statistic, inverse_sqrt, rho_hat, sigma_matrix, TestResult, EIGEN_FLOOR};

use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::cdf::{fit_conditional_cdf, pit_residuals, QuantileGrid};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::qreg::{select_penalty, PenaltySchedule};

/// How the per-level L1 penalty is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltyConfig {
    None,
    /// `c * lambda * sqrt(tau (1 - tau))` with `lambda` simulated from `n_sim` draws.
    Simulated { c: f64, n_sim: usize },
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig::Simulated { c: 1.1, n_sim: 1000 }
    }
}

/// Settings for the two conditional CDF estimates. Unset fields are filled
/// by [`CdfConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfConfig {
    #[serde(default)]
    pub basis_x: Option<BasisSpec>,
    /// Defaults to `basis_x`.
    #[serde(default)]
    pub basis_y: Option<BasisSpec>,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Grid size, `ceil(sqrt(n))` when unset.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub penalty: PenaltyConfig,
}

impl Default for CdfConfig {
    fn default() -> Self {
        Self {
            basis_x: None,
            basis_y: None,
            tau_min: 0.01,
            tau_max: 0.99,
            m: None,
            penalty: PenaltyConfig::default(),
        }
    }
}

impl CdfConfig {
    /// Fills every default for a sample of size `n` with `d` covariates.
    pub fn resolve(&self, n: usize, d: usize) -> CdfConfig {
        let basis_x = self.basis_x.clone().unwrap_or_else(|| BasisSpec::default_for(d));
        let basis_y = self.basis_y.clone().unwrap_or_else(|| basis_x.clone());
        CdfConfig {
            basis_x: Some(basis_x),
            basis_y: Some(basis_y),
            m: Some(self.m.unwrap_or_else(|| crate::cdf::default_grid_size(n))),
            ..self.clone()
        }
    }

    pub fn grid(&self, n: usize) -> Result<QuantileGrid> {
        let m = self.m.unwrap_or_else(|| crate::cdf::default_grid_size(n));
        QuantileGrid::equidistant(self.tau_min, self.tau_max, m)
    }
}

/// Full configuration of [`pc_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcConfig {
    pub q: usize,
    pub alpha: f64,
    pub delta_fraction: f64,
    /// Seed of the penalty simulation; the only randomness in the test.
    pub seed: u64,
    pub cdf: CdfConfig,
}

impl Default for PcConfig {
    fn default() -> Self {
        Self {
            q: 1,
            alpha: 0.05,
            delta_fraction: 0.01,
            seed: 0,
            cdf: CdfConfig::default(),
        }
    }
}

impl PcConfig {
    pub fn with_q(mut self, q: usize) -> Self {
        self.q = q;
        self
    }

    pub fn resolve(&self, n: usize, d: usize) -> PcConfig {
        PcConfig {
            cdf: self.cdf.resolve(n, d),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::Domain("q must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha {} outside (0,1)", self.alpha)));
        }
        if !(self.delta_fraction > 0.0 && self.delta_fraction < 0.5) {
            return Err(Error::Domain(format!(
                "delta fraction {} outside (0, 0.5)",
                self.delta_fraction
            )));
        }
        Ok(())
    }
}

/// Nonparametric residuals of both variables together with the bases used.
#[derive(Debug, Clone, PartialEq)]
pub struct PitResiduals {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub basis_x: BasisSpec,
    pub basis_y: BasisSpec,
}

fn schedule(
    basis: &BasisSpec,
    data: &Dataset,
    grid: &QuantileGrid,
    penalty: &PenaltyConfig,
    seed: u64,
) -> Result<Option<PenaltySchedule>> {
    match penalty {
        PenaltyConfig::None => Ok(None),
        PenaltyConfig::Simulated { c, n_sim } => {
            let w = basis.design_rows(data.z_cols(), data.n())?;
            select_penalty(&w, &grid.taus, *c, *n_sim, seed).map(Some)
        }
    }
}

/// Fits `F_X|Z` and `F_Y|Z` on the full sample and evaluates the residuals
/// `U1 = F_X|Z(X | Z)`, `U2 = F_Y|Z(Y | Z)`. `data` must be transformed.
pub fn estimate_residuals(data: &Dataset, cdf: &CdfConfig, seed: u64) -> Result<PitResiduals> {
    if !data.is_transformed() {
        return Err(Error::Domain(
            "residual estimation needs pseudo-observations; call to_pseudo_obs first".into(),
        ));
    }
    let cfg = cdf.resolve(data.n(), data.d());
    let grid = cfg.grid(data.n()).map_err(|e| e.at_stage("grid"))?;
    let basis_x = cfg.basis_x.expect("resolved");
    let basis_y = cfg.basis_y.expect("resolved");

    let pen_x = schedule(&basis_x, data, &grid, &cfg.penalty, seed).map_err(|e| e.at_stage("penalty"))?;
    let pen_y = if basis_y == basis_x {
        pen_x.clone()
    } else {
        schedule(&basis_y, data, &grid, &cfg.penalty, seed).map_err(|e| e.at_stage("penalty"))?
    };

    let (mx, my) = rayon::join(
        || fit_conditional_cdf(data.x(), data.z_cols(), &basis_x, &grid, pen_x.as_ref()),
        || fit_conditional_cdf(data.y(), data.z_cols(), &basis_y, &grid, pen_y.as_ref()),
    );
    let mx = mx.map_err(|e| e.at_stage("conditional CDF of x"))?;
    let my = my.map_err(|e| e.at_stage("conditional CDF of y"))?;
    let (u1, u2) = pit_residuals(&mx, &my, data).map_err(|e| e.at_stage("residuals"))?;
    Ok(PitResiduals {
        u1,
        u2,
        basis_x,
        basis_y,
    })
}

/// Test statistic for given residuals; `q`, `alpha` and `delta_fraction`
/// come from `config`, the trimming range from its CDF grid bounds.
pub fn pc_test_from_residuals(res: &PitResiduals, config: &PcConfig) -> Result<TestResult> {
    config.validate()?;
    let family = build_trimmed_spearman(
        config.q,
        config.cdf.tau_min,
        config.cdf.tau_max,
        config.delta_fraction,
    )
    .map_err(|e| e.at_stage("phi family"))?;
    let rho = rho_hat(&res.u1, &res.u2, &family).map_err(|e| e.at_stage("statistic"))?;
    let sigma = sigma_matrix(&family);
    let mut out = chi_square_statistic(&rho, &sigma, res.u1.len(), config.alpha)
        .map_err(|e| e.at_stage("statistic"))?;
    out.seed = Some(config.seed);
    out.basis_x = Some(res.basis_x.clone());
    out.basis_y = Some(res.basis_y.clone());
    Ok(out)
}

/// End-to-end partial copula test. Raw data is converted to
/// pseudo-observations first; already transformed data is used as is.
pub fn pc_test(data: &Dataset, config: &PcConfig) -> Result<TestResult> {
    config.validate()?;
    let owned;
    let data = if data.is_transformed() {
        data
    } else {
        owned = data.to_pseudo_obs().map_err(|e| e.at_stage("preprocessing"))?;
        &owned
    };
    let res = estimate_residuals(data, &config.cdf, config.seed)?;
    pc_test_from_residuals(&res, config)
}
