use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Asymmetry of the Laplace errors of H1/A1.
pub const LAPLACE_KAPPA: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Process {
    H1,
    H2,
    H3,
    H4,
    A1,
    A2,
    A3,
    A4,
    #[serde(rename = "LOCAL")]
    Local,
}

impl Process {
    pub const ALL: [Process; 9] = [
        Process::H1,
        Process::H2,
        Process::H3,
        Process::H4,
        Process::A1,
        Process::A2,
        Process::A3,
        Process::A4,
        Process::Local,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Process::H1 => "H1",
            Process::H2 => "H2",
            Process::H3 => "H3",
            Process::H4 => "H4",
            Process::A1 => "A1",
            Process::A2 => "A2",
            Process::A3 => "A3",
            Process::A4 => "A4",
            Process::Local => "LOCAL",
        }
    }

    /// Whether `Y` depends on `X` given `Z`.
    pub fn is_alternative(self) -> bool {
        !matches!(self, Process::H1 | Process::H2 | Process::H3 | Process::H4)
    }

    fn family(self) -> u8 {
        match self {
            Process::H1 | Process::A1 => 1,
            Process::H2 | Process::A2 => 2,
            Process::H3 | Process::A3 => 3,
            Process::H4 | Process::A4 => 4,
            Process::Local => 0,
        }
    }
}

impl std::str::FromStr for Process {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Process::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown process `{s}`")))
    }
}

impl std::fmt::Display for Process {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How regression coefficients are drawn before each sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientRule {
    /// N(0,1) for the H processes, random signs of 1 for A1-A3 and of 5 for A4.
    #[default]
    Standard,
    /// All coefficients zero.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub process: Process,
    pub d: usize,
    /// Heteroskedasticity strength of the local alternative.
    #[serde(default)]
    pub beta: f64,
    /// Dependence strength of the local alternative, `gamma^2 = gamma0_sq / sqrt(n)`.
    #[serde(default)]
    pub gamma0_sq: f64,
    #[serde(default)]
    pub coefficients: CoefficientRule,
}

impl DgpSpec {
    pub fn new(process: Process, d: usize) -> Self {
        Self {
            process,
            d,
            beta: 0.0,
            gamma0_sq: 0.0,
            coefficients: CoefficientRule::Standard,
        }
    }

    pub fn local(beta: f64, gamma0_sq: f64) -> Self {
        Self {
            process: Process::Local,
            d: 1,
            beta,
            gamma0_sq,
            coefficients: CoefficientRule::Standard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Domain("d must be >= 1".into()));
        }
        if self.process == Process::Local {
            if self.d != 1 {
                return Err(Error::Domain("the local alternative has d = 1".into()));
            }
            if !(self.beta >= 0.0 && self.gamma0_sq >= 0.0) {
                return Err(Error::Domain("beta and gamma0_sq must be >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Location and scale functions of one response: `sum_j lin_j w_j + quad_j w_j^2`
/// and, for the first family, `exp(-|sum_j a_lin_j w_j + a_quad_j w_j^2|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub lin: Vec<f64>,
    pub quad: Vec<f64>,
    pub scale_lin: Vec<f64>,
    pub scale_quad: Vec<f64>,
}

fn additive(lin: &[f64], quad: &[f64], w: &[f64]) -> f64 {
    w.iter()
        .zip(lin.iter().zip(quad))
        .map(|(v, (a, b))| a * v + b * v * v)
        .sum()
}

impl Coefficients {
    fn draw(rng: &mut ChaCha20Rng, len: usize, process: Process, rule: CoefficientRule) -> Self {
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| match rule {
                    CoefficientRule::Zero => 0.0,
                    CoefficientRule::Standard => match process {
                        Process::A1 | Process::A2 | Process::A3 => random_sign(rng),
                        Process::A4 => 5.0 * random_sign(rng),
                        _ => rng.sample(StandardNormal),
                    },
                })
                .collect()
        };
        let lin = draw(len);
        let quad = draw(len);
        let scale_lin = draw(len);
        let scale_quad = draw(len);
        Self {
            lin,
            quad,
            scale_lin,
            scale_quad,
        }
    }

    /// `(f(w), g(w))` for the given process family.
    fn location_scale(&self, family: u8, w: &[f64]) -> (f64, f64) {
        match family {
            1 => (
                additive(&self.lin, &self.quad, w),
                (-additive(&self.scale_lin, &self.scale_quad, w).abs()).exp(),
            ),
            2 => (additive(&self.lin, &[], w), 1.0),
            3 => (additive(&self.lin, &self.quad, w), 1.0),
            4 => (0.0, additive(&self.lin, &self.quad, w)),
            _ => unreachable!("local alternative has no coefficients"),
        }
    }
}

fn random_sign(rng: &mut ChaCha20Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Asymmetric Laplace(0, 1, kappa) as `E1 / kappa - kappa E2`.
pub fn asymmetric_laplace<R: Rng + ?Sized>(rng: &mut R, kappa: f64) -> f64 {
    let e1: f64 = rng.sample(Exp1);
    let e2: f64 = rng.sample(Exp1);
    e1 / kappa - kappa * e2
}

/// Median of [`asymmetric_laplace`]: `ln(2 / (1 + kappa^2)) / kappa`.
pub fn asymmetric_laplace_median(kappa: f64) -> f64 {
    (2.0 / (1.0 + kappa * kappa)).ln() / kappa
}

/// Gumbel(0, 1) as `-ln(-ln U)`.
pub fn gumbel<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -(-u.ln()).ln()
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws the coefficients of both responses for one sample.
pub fn draw_coefficients(spec: &DgpSpec, seed: u64) -> Result<(Coefficients, Coefficients)> {
    spec.validate()?;
    if spec.process == Process::Local {
        return Err(Error::Domain("the local alternative has no random coefficients".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok(coefficients(&mut rng, spec))
}

fn coefficients(rng: &mut ChaCha20Rng, spec: &DgpSpec) -> (Coefficients, Coefficients) {
    let extra = usize::from(spec.process.is_alternative());
    let c1 = Coefficients::draw(rng, spec.d, spec.process, spec.coefficients);
    let c2 = Coefficients::draw(rng, spec.d + extra, spec.process, spec.coefficients);
    (c1, c2)
}

/// One raw sample of size `n`. Fresh coefficients are drawn from the same
/// seed first; `Z_j ~ U[-1, 1]`. For alternatives `Y` is generated from
/// `(Z, X)`.
pub fn sample_dgp(spec: &DgpSpec, n: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if spec.process == Process::Local {
        return sample_local_alternative(spec.beta, spec.gamma0_sq, n, seed);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (c1, c2) = coefficients(&mut rng, spec);
    let family = spec.process.family();
    let d = spec.d;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut z = vec![Vec::with_capacity(n); d];
    let mut w = vec![0.0; d + 1];
    for _ in 0..n {
        for (j, col) in z.iter_mut().enumerate() {
            let v = rng.random_range(-1.0..=1.0);
            w[j] = v;
            col.push(v);
        }
        let (e1, e2) = if family == 1 {
            (asymmetric_laplace(&mut rng, LAPLACE_KAPPA), gumbel(&mut rng))
        } else {
            (standard_normal(&mut rng), standard_normal(&mut rng))
        };
        let (f1, g1) = c1.location_scale(family, &w[..d]);
        let xi = f1 + g1 * e1;
        let args = if spec.process.is_alternative() {
            w[d] = xi;
            &w[..]
        } else {
            &w[..d]
        };
        let (f2, g2) = c2.location_scale(family, args);
        x.push(xi);
        y.push(f2 + g2 * e2);
    }
    Dataset::new(x, y, z)
}

/// `Z ~ U[0,1]`, `X = (beta Z^2 + 1) e1 + gamma W`, `Y = (beta Z^2 + 1) e2 + gamma W`
/// with `gamma^2 = gamma0_sq / sqrt(n)`.
pub fn sample_local_alternative(beta: f64, gamma0_sq: f64, n: usize, seed: u64) -> Result<Dataset> {
    if !(beta >= 0.0 && gamma0_sq >= 0.0) {
        return Err(Error::Domain("beta and gamma0_sq must be >= 0".into()));
    }
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let gamma = local_gamma_sq(gamma0_sq, n).sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let zi: f64 = rng.random();
        let w = standard_normal(&mut rng);
        let e1 = standard_normal(&mut rng);
        let e2 = standard_normal(&mut rng);
        let s = beta * zi * zi + 1.0;
        z.push(zi);
        x.push(s * e1 + gamma * w);
        y.push(s * e2 + gamma * w);
    }
    Dataset::new(x, y, vec![z])
}

pub fn local_gamma_sq(gamma0_sq: f64, n: usize) -> f64 {
    gamma0_sq / (n as f64).sqrt()
}
