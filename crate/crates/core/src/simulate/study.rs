use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{sample_dgp, DgpSpec};
use crate::baselines::{gcm_test, npn_test, MeanRegressionSpec};
use crate::basis::BasisSpec;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gencorr::{estimate_residuals, pc_test_from_residuals, CdfConfig, PcConfig, PitResiduals, TestResult};

/// One test to run on every replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum TestSpec {
    /// Partial copula test. Its `seed` is replaced per replicate in studies.
    Pc(PcConfig),
    /// GCM with least-squares mean regressions on `basis` (default: the
    /// default quantile basis). With `square`, `x` and `y` are squared
    /// before the rank transform.
    Gcm {
        #[serde(default)]
        basis: Option<BasisSpec>,
        #[serde(default)]
        square: bool,
    },
    Npn,
}

impl TestSpec {
    pub fn label(&self) -> String {
        match self {
            TestSpec::Pc(c) => format!("pc(q={})", c.q),
            TestSpec::Gcm { square: false, .. } => "gcm".into(),
            TestSpec::Gcm { square: true, .. } => "gcm(squared)".into(),
            TestSpec::Npn => "npn".into(),
        }
    }

    /// Runs the test on `raw` data; `transformed` must be its pseudo-observations.
    /// `alpha` overrides the level stored in a `Pc` spec.
    pub fn run(&self, raw: &Dataset, transformed: &Dataset, alpha: f64) -> Result<TestResult> {
        let mut cache = Vec::new();
        self.run_cached(raw, transformed, alpha, &mut cache)
    }

    fn run_cached(
        &self,
        raw: &Dataset,
        transformed: &Dataset,
        alpha: f64,
        cache: &mut Vec<(CdfConfig, u64, PitResiduals)>,
    ) -> Result<TestResult> {
        match self {
            TestSpec::Pc(cfg) => {
                let cfg = PcConfig { alpha, ..cfg.clone() };
                let hit = cache.iter().position(|(c, s, _)| *c == cfg.cdf && *s == cfg.seed);
                let idx = match hit {
                    Some(i) => i,
                    None => {
                        let res = estimate_residuals(transformed, &cfg.cdf, cfg.seed)?;
                        cache.push((cfg.cdf.clone(), cfg.seed, res));
                        cache.len() - 1
                    }
                };
                let mut out = pc_test_from_residuals(&cache[idx].2, &cfg)?;
                out.method = self.label();
                Ok(out)
            }
            TestSpec::Gcm { basis, square } => {
                let basis = basis.clone().unwrap_or_else(|| BasisSpec::default_for(raw.d()));
                let spec = MeanRegressionSpec::new(basis);
                let squared;
                let data = if *square {
                    squared = Dataset::new(
                        raw.x().iter().map(|v| v * v).collect(),
                        raw.y().iter().map(|v| v * v).collect(),
                        raw.z_cols().to_vec(),
                    )?
                    .to_pseudo_obs()?;
                    &squared
                } else {
                    transformed
                };
                let mut out = gcm_test(data, &spec, &spec, alpha)?;
                out.method = self.label();
                Ok(out)
            }
            TestSpec::Npn => npn_test(transformed, alpha),
        }
    }
}

/// Seed of replicate `index` under `master`: two rounds of the SplitMix64
/// finalizer, so neighbouring indices give unrelated streams.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `sample` and a
/// continuous `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    if sample.is_empty() {
        return f64::NAN;
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// KS distance to the uniform distribution on `[0,1]`.
pub fn ks_uniform(p_values: &[f64]) -> f64 {
    ks_statistic(p_values, |t| t.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateError {
    pub replicate: usize,
    pub message: String,
}

/// Results of one test across all replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub label: String,
    pub spec: TestSpec,
    /// Indexed by replicate; `None` where the test failed.
    pub p_values: Vec<Option<f64>>,
    pub failures: usize,
    pub errors: Vec<ReplicateError>,
    /// KS distance of the successful p-values to the uniform distribution.
    pub ks: f64,
    /// Fraction of successful p-values below `alpha`.
    pub rejection_rate: f64,
}

impl TestSummary {
    pub fn successful(&self) -> Vec<f64> {
        self.p_values.iter().flatten().copied().collect()
    }
}

/// Deterministic description of the run. Wall-clock timings are reported
/// by the caller, not stored, so reports are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub package_version: String,
    pub seeding: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub dgp: DgpSpec,
    pub n: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub master_seed: u64,
    pub tests: Vec<TestSummary>,
    pub run: RunInfo,
}

impl SimReport {
    pub fn summary(&self, label: &str) -> Option<&TestSummary> {
        self.tests.iter().find(|t| t.label == label)
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    /// Long format `replicate,test,p_value`; failed replicates have an empty p-value.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["replicate", "test", "p_value"])?;
        for r in 0..self.replicates {
            for t in &self.tests {
                let p = t.p_values[r].map(|p| p.to_string()).unwrap_or_default();
                out.write_record([r.to_string(), t.label.clone(), p])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Seed of the `k`-th derived stream within a replicate (0: data).
const PENALTY_STREAM: u64 = 1;

/// Runs every test on `replicates` independent samples.
///
/// Replicate `r` samples with `derive_seed(master_seed, r)`, converts to
/// pseudo-observations and runs each test; partial copula tests use
/// `derive_seed(that seed, 1)` for the penalty simulation and share residuals
/// when their CDF settings agree. Replicates run in parallel and are stored
/// by index, so the report does not depend on the number of threads.
pub fn run_study(
    dgp: &DgpSpec,
    n: usize,
    replicates: usize,
    tests: &[TestSpec],
    alpha: f64,
    master_seed: u64,
) -> Result<SimReport> {
    dgp.validate()?;
    if replicates == 0 {
        return Err(Error::Domain("replicates must be >= 1".into()));
    }
    if tests.is_empty() {
        return Err(Error::Domain("no tests selected".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0,1)")));
    }
    for t in tests {
        if let TestSpec::Pc(c) = t {
            c.validate()?;
        }
    }

    let outcomes: Vec<Vec<std::result::Result<f64, String>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(master_seed, r as u64);
            let prepared = sample_dgp(dgp, n, seed)
                .and_then(|raw| raw.to_pseudo_obs().map(|t| (raw, t)));
            let (raw, transformed) = match prepared {
                Ok(v) => v,
                Err(e) => return vec![Err(format!("sampling: {e}")); tests.len()],
            };
            let pen_seed = derive_seed(seed, PENALTY_STREAM);
            let mut cache = Vec::new();
            tests
                .iter()
                .map(|t| {
                    let t = match t {
                        TestSpec::Pc(c) => TestSpec::Pc(PcConfig { seed: pen_seed, ..c.clone() }),
                        other => other.clone(),
                    };
                    t.run_cached(&raw, &transformed, alpha, &mut cache)
                        .map(|res| res.p_value)
                        .map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();

    let summaries = tests
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let mut p_values = Vec::with_capacity(replicates);
            let mut errors = Vec::new();
            for (r, row) in outcomes.iter().enumerate() {
                match &row[k] {
                    Ok(p) => p_values.push(Some(*p)),
                    Err(message) => {
                        p_values.push(None);
                        errors.push(ReplicateError {
                            replicate: r,
                            message: message.clone(),
                        });
                    }
                }
            }
            let ok: Vec<f64> = p_values.iter().flatten().copied().collect();
            let rejection_rate = if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().filter(|p| **p < alpha).count() as f64 / ok.len() as f64
            };
            let mut label = spec.label();
            if tests.iter().filter(|t| t.label() == label).count() > 1 {
                label = format!("{label}#{k}");
            }
            TestSummary {
                label,
                spec: spec.clone(),
                failures: errors.len(),
                errors,
                ks: ks_uniform(&ok),
                rejection_rate,
                p_values,
            }
        })
        .collect();

    Ok(SimReport {
        dgp: dgp.clone(),
        n,
        replicates,
        alpha,
        master_seed,
        tests: summaries,
        run: RunInfo {
            package_version: env!("CARGO_PKG_VERSION").into(),
            seeding: "replicate r uses splitmix(master, r); pc penalty uses splitmix(that, 1)".into(),
        },
    })
}
