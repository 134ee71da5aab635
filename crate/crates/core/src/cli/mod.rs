//! Command-line front end.
//!
//! Every subcommand first resolves its flags into a complete [`RunConfig`]
//! (all defaults filled in), then executes that config. Artifacts embed the
//! config, and `--config <artifact>` executes it again, so a run can be
//! reproduced byte for byte from its own output.

mod parse;

pub use parse::{parse_basis, parse_tests};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::cdf::{fit_conditional_cdf, ConditionalCdfModel};
use crate::dataset::{ColumnSpec, Dataset};
use crate::error::Error;
use crate::gencorr::{estimate_residuals, pc_test_from_residuals, CdfConfig, PcConfig, PenaltyConfig, TestResult};
use crate::qreg::select_penalty;
use crate::simulate::{run_study, sample_dgp, DgpSpec, Process, SimReport, TestSpec};

pub const NO_MULTIPLICITY_CORRECTION: &str = "no multiplicity correction applied";

#[derive(Debug, Parser)]
#[command(name = "pcopula", version, about = "Conditional independence tests with partial copulas")]
pub struct Cli {
    /// Worker threads (does not affect results).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    /// Re-run the configuration embedded in an earlier artifact; other
    /// options of the subcommand are ignored.
    #[arg(long, global = true, value_name = "ARTIFACT")]
    pub config: Option<PathBuf>,

    /// Output file (default: standard output).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test X independent of Y given Z on a CSV file.
    Test(TestArgs),
    /// Fit a conditional CDF model of one column given Z.
    FitCdf(FitCdfArgs),
    /// Draw a sample from a data-generating process and write it as CSV.
    Simulate(SimulateArgs),
    /// Monte Carlo level/power study.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "x")]
    pub x: String,
    #[arg(long, default_value = "y")]
    pub y: String,
    /// Conditioning columns; all remaining columns when omitted.
    #[arg(long, value_delimiter = ',')]
    pub z: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct CdfArgs {
    /// bspline, bspline<df>, poly<degree> or const.
    #[arg(long, default_value = "bspline")]
    pub basis: String,
    #[arg(long, default_value_t = 0.01, value_parser = parse_level)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 0.99, value_parser = parse_level)]
    pub tau_max: f64,
    /// Number of quantile levels (default ceil(sqrt(n))).
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub m: Option<u64>,
    /// Disable the L1 penalty.
    #[arg(long)]
    pub no_penalty: bool,
    #[arg(long, default_value_t = 1.1)]
    pub penalty_c: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(100..))]
    pub n_sim: u64,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cdf: CdfArgs,
    /// Tests to run: pc, gcm, npn (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "pc")]
    pub method: Vec<Method>,
    /// Number of trimmed Spearman functions; several values give separate p-values.
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = clap::value_parser!(u64).range(1..))]
    pub q: Vec<u64>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_level)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01, value_parser = parse_delta)]
    pub delta_fraction: f64,
    /// Mean-regression basis of the GCM test (default: --basis).
    #[arg(long)]
    pub gcm_basis: Option<String>,
    /// Run GCM on squared x and y.
    #[arg(long)]
    pub gcm_square: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pc,
    Gcm,
    Npn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    X,
    Y,
}

#[derive(Debug, Args)]
pub struct FitCdfArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cdf: CdfArgs,
    #[arg(long, value_enum, default_value = "x")]
    pub response: Response,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DgpArgs {
    /// H1-H4, A1-A4 or LOCAL.
    #[arg(long, value_parser = parse_process)]
    pub dgp: Option<Process>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub d: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    /// LOCAL only.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// LOCAL only.
    #[arg(long, default_value_t = 0.0)]
    pub gamma0_sq: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub dgp: DgpArgs,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub dgp: DgpArgs,
    #[command(flatten)]
    pub cdf: CdfArgs,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    pub replicates: u64,
    /// e.g. `pc:q=1,pc:q=3:basis=poly2,gcm:basis=poly1,npn`.
    #[arg(long, default_value = "pc,gcm,npn")]
    pub tests: String,
    #[arg(long, default_value_t = 0.05, value_parser = parse_level)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01, value_parser = parse_delta)]
    pub delta_fraction: f64,
    /// Also write the long-format p-value table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_level(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} must lie strictly between 0 and 1"))
    }
}

fn parse_delta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 0.5 {
        Ok(v)
    } else {
        Err(format!("{v} must lie strictly between 0 and 0.5"))
    }
}

fn parse_process(s: &str) -> Result<Process, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Test(_) => "test",
            Command::FitCdf(_) => "fit-cdf",
            Command::Simulate(_) => "simulate",
            Command::Benchmark(_) => "benchmark",
        }
    }
}

impl RunConfig {
    pub fn command_name(&self) -> &'static str {
        match self {
            RunConfig::Test(_) => "test",
            RunConfig::FitCdf(_) => "fit-cdf",
            RunConfig::Simulate(_) => "simulate",
            RunConfig::Benchmark(_) => "benchmark",
        }
    }
}

/// Fully resolved run description embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Test(TestConfig),
    FitCdf(FitCdfConfig),
    Simulate(SimulateConfig),
    Benchmark(BenchmarkConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub input: PathBuf,
    pub columns: ColumnSpec,
    pub methods: Vec<Method>,
    pub q: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
    /// Settings shared by every pc run; its `q` is the first entry of `q`.
    pub pc: PcConfig,
    pub gcm_basis: BasisSpec,
    pub gcm_square: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitCdfConfig {
    pub input: PathBuf,
    pub columns: ColumnSpec,
    pub response: Response,
    pub seed: u64,
    pub cdf: CdfConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub dgp: DgpSpec,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub dgp: DgpSpec,
    pub n: usize,
    pub replicates: usize,
    pub tests: Vec<TestSpec>,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TestArtifact {
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<String>,
    pub results: Vec<TestResult>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitCdfArtifact {
    pub config: RunConfig,
    pub model: ConditionalCdfModel,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BenchmarkArtifact {
    pub config: RunConfig,
    pub report: SimReport,
}

#[derive(Debug, Deserialize)]
struct ConfigOnly {
    config: RunConfig,
}

/// Failure of a CLI run, mapped to an exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or paths: exit 2.
    Usage(String),
    /// Data or numerical failure: exit 1.
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => {
                write!(f, "error: {e}")?;
                let mut src = std::error::Error::source(e);
                while let Some(s) = src {
                    write!(f, "\n  caused by: {s}")?;
                    src = s.source();
                }
                Ok(())
            }
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// What a run produced: the main artifact and optional extra files.
pub struct Output {
    pub main: Vec<u8>,
    pub extra: Vec<(PathBuf, Vec<u8>)>,
}

/// Parses `argv`, runs the command and returns the process exit status.
/// Diagnostics go to standard error.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(out) = &cli.output {
        check_output(out)?;
    }
    let config = match &cli.config {
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            let c: ConfigOnly = serde_json::from_slice(&bytes)
                .map_err(|e| usage(format!("{} holds no run config: {e}", path.display())))?;
            if c.config.command_name() != cli.command.name() {
                return Err(usage(format!(
                    "{} holds a `{}` config, not `{}`",
                    path.display(),
                    c.config.command_name(),
                    cli.command.name()
                )));
            }
            c.config
        }
        None => resolve(&cli.command)?,
    };
    let extra_csv = match &cli.command {
        Command::Benchmark(b) => b.csv.clone(),
        _ => None,
    };
    if let Some(p) = &extra_csv {
        check_output(p)?;
    }
    let threads = cli.threads.map_or(0, usize::from);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(format!("cannot start {threads} threads: {e}")))?;
    let start = Instant::now();
    let output = pool.install(|| execute(&config, extra_csv.as_deref()))?;
    eprintln!("finished in {:.2}s", start.elapsed().as_secs_f64());

    match &cli.output {
        Some(path) => {
            std::fs::write(path, &output.main).map_err(Error::from)?;
            if let RunConfig::Simulate(_) = config {
                let sidecar = sidecar_path(path);
                std::fs::write(&sidecar, config_json(&config)?).map_err(Error::from)?;
            }
        }
        None => std::io::stdout().write_all(&output.main).map_err(Error::from)?,
    }
    for (path, bytes) in output.extra {
        std::fs::write(path, bytes).map_err(Error::from)?;
    }
    Ok(())
}

/// `<output>.config.json`, written next to a simulated CSV.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn config_json(config: &RunConfig) -> Result<Vec<u8>, CliError> {
    #[derive(Serialize)]
    struct Wrapper<'a> {
        config: &'a RunConfig,
    }
    pretty(&Wrapper { config })
}

fn pretty<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(v).map_err(Error::from)?;
    out.push(b'\n');
    Ok(out)
}

fn check_output(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(usage(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn check_input(data: &DataArgs) -> Result<PathBuf, CliError> {
    let path = data.input.clone().ok_or_else(|| usage("--input is required"))?;
    if !path.is_file() {
        return Err(usage(format!("input file {} not found", path.display())));
    }
    Ok(path)
}

/// Header names of a CSV file.
fn csv_header(path: &Path) -> Result<Vec<String>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(Error::from)?;
    Ok(rdr.headers().map_err(Error::from)?.iter().map(str::to_string).collect())
}

fn columns(data: &DataArgs, path: &Path) -> Result<ColumnSpec, CliError> {
    let z = match &data.z {
        Some(z) => z.iter().filter(|s| !s.is_empty()).cloned().collect(),
        None => csv_header(path)?
            .into_iter()
            .filter(|h| *h != data.x && *h != data.y)
            .collect(),
    };
    Ok(ColumnSpec {
        x: data.x.clone(),
        y: data.y.clone(),
        z,
    })
}

fn cdf_config(args: &CdfArgs, d: usize) -> Result<CdfConfig, CliError> {
    if args.tau_min >= args.tau_max {
        return Err(usage(format!(
            "--tau-min {} must be below --tau-max {}",
            args.tau_min, args.tau_max
        )));
    }
    if !(args.penalty_c >= 0.0 && args.penalty_c.is_finite()) {
        return Err(usage("--penalty-c must be finite and >= 0"));
    }
    let basis = parse_basis(&args.basis, d).map_err(usage)?;
    Ok(CdfConfig {
        basis_x: Some(basis.clone()),
        basis_y: Some(basis),
        tau_min: args.tau_min,
        tau_max: args.tau_max,
        m: args.m.map(|m| m as usize),
        penalty: if args.no_penalty {
            PenaltyConfig::None
        } else {
            PenaltyConfig::Simulated {
                c: args.penalty_c,
                n_sim: args.n_sim as usize,
            }
        },
    })
}

fn dgp_spec(args: &DgpArgs) -> Result<(DgpSpec, usize), CliError> {
    let process = args.dgp.ok_or_else(|| usage("--dgp is required"))?;
    let n = args.n.ok_or_else(|| usage("--n is required"))? as usize;
    let spec = if process == Process::Local {
        DgpSpec::local(args.beta, args.gamma0_sq)
    } else {
        DgpSpec::new(process, args.d as usize)
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    Ok((spec, n))
}

/// Turns command-line flags into a complete configuration.
pub fn resolve(command: &Command) -> Result<RunConfig, CliError> {
    match command {
        Command::Test(a) => {
            let input = check_input(&a.data)?;
            let columns = columns(&a.data, &input)?;
            let d = columns.z.len();
            let n = Dataset::load_csv(&input, &columns)?.n();
            let cdf = cdf_config(&a.cdf, d)?.resolve(n, d);
            let q: Vec<usize> = a.q.iter().map(|&q| q as usize).collect();
            let pc = PcConfig {
                q: q[0],
                alpha: a.alpha,
                delta_fraction: a.delta_fraction,
                seed: a.seed,
                cdf,
            };
            let gcm_basis = match &a.gcm_basis {
                Some(b) => parse_basis(b, d).map_err(usage)?,
                None => pc.cdf.basis_x.clone().expect("resolved"),
            };
            let mut methods = a.method.clone();
            methods.dedup();
            Ok(RunConfig::Test(TestConfig {
                input,
                columns,
                methods,
                q,
                alpha: a.alpha,
                seed: a.seed,
                pc,
                gcm_basis,
                gcm_square: a.gcm_square,
            }))
        }
        Command::FitCdf(a) => {
            let input = check_input(&a.data)?;
            let columns = columns(&a.data, &input)?;
            let d = columns.z.len();
            let n = Dataset::load_csv(&input, &columns)?.n();
            Ok(RunConfig::FitCdf(FitCdfConfig {
                input,
                columns,
                response: a.response,
                seed: a.seed,
                cdf: cdf_config(&a.cdf, d)?.resolve(n, d),
            }))
        }
        Command::Simulate(a) => {
            let (dgp, n) = dgp_spec(&a.dgp)?;
            Ok(RunConfig::Simulate(SimulateConfig {
                dgp,
                n,
                seed: a.dgp.seed,
            }))
        }
        Command::Benchmark(a) => {
            let (dgp, n) = dgp_spec(&a.dgp)?;
            let cdf = cdf_config(&a.cdf, dgp.d)?.resolve(n, dgp.d);
            let base = PcConfig {
                q: 1,
                alpha: a.alpha,
                delta_fraction: a.delta_fraction,
                seed: 0,
                cdf,
            };
            let gcm_basis = base.cdf.basis_x.clone().expect("resolved");
            let tests = parse_tests(&a.tests, &base, &gcm_basis, dgp.d)
                .map_err(|e| usage(format!("--tests: {e}")))?
                .into_iter()
                .map(|t| match t {
                    TestSpec::Pc(c) => TestSpec::Pc(c.resolve(n, dgp.d)),
                    other => other,
                })
                .collect();
            Ok(RunConfig::Benchmark(BenchmarkConfig {
                dgp,
                n,
                replicates: a.replicates as usize,
                tests,
                alpha: a.alpha,
                seed: a.dgp.seed,
            }))
        }
    }
}

/// Runs a resolved configuration. The output depends only on `config`.
pub fn execute(config: &RunConfig, csv_path: Option<&Path>) -> Result<Output, CliError> {
    let config_echo = config.clone();
    match config {
        RunConfig::Test(c) => {
            if c.q.is_empty() || c.q.contains(&0) {
                return Err(usage("q values must be >= 1"));
            }
            let raw = Dataset::load_csv(&c.input, &c.columns)?;
            let data = raw.to_pseudo_obs()?;
            let mut results = Vec::new();
            for method in &c.methods {
                match method {
                    Method::Pc => {
                        let res = estimate_residuals(&data, &c.pc.cdf, c.pc.seed)?;
                        for &q in &c.q {
                            results.push(pc_test_from_residuals(&res, &c.pc.clone().with_q(q))?);
                        }
                    }
                    Method::Gcm => {
                        let spec = TestSpec::Gcm {
                            basis: Some(c.gcm_basis.clone()),
                            square: c.gcm_square,
                        };
                        results.push(spec.run(&raw, &data, c.alpha)?);
                    }
                    Method::Npn => results.push(TestSpec::Npn.run(&raw, &data, c.alpha)?),
                }
            }
            let multiplicity = (c.methods.contains(&Method::Pc) && c.q.len() > 1)
                .then(|| NO_MULTIPLICITY_CORRECTION.to_string());
            Ok(Output {
                main: pretty(&TestArtifact {
                    config: config_echo,
                    multiplicity,
                    results,
                })?,
                extra: Vec::new(),
            })
        }
        RunConfig::FitCdf(c) => {
            let data = Dataset::load_csv(&c.input, &c.columns)?.to_pseudo_obs()?;
            let cfg = c.cdf.resolve(data.n(), data.d());
            let basis = cfg.basis_x.clone().expect("resolved");
            let grid = cfg.grid(data.n())?;
            let penalty = match cfg.penalty {
                PenaltyConfig::None => None,
                PenaltyConfig::Simulated { c: mult, n_sim } => {
                    let w = basis.design_rows(data.z_cols(), data.n())?;
                    Some(select_penalty(&w, &grid.taus, mult, n_sim, c.seed)?)
                }
            };
            let response = match c.response {
                Response::X => data.x(),
                Response::Y => data.y(),
            };
            let model = fit_conditional_cdf(response, data.z_cols(), &basis, &grid, penalty.as_ref())?;
            Ok(Output {
                main: pretty(&FitCdfArtifact {
                    config: config_echo,
                    model,
                })?,
                extra: Vec::new(),
            })
        }
        RunConfig::Simulate(c) => {
            let data = sample_dgp(&c.dgp, c.n, c.seed)?;
            let mut main = Vec::new();
            data.write_csv(&mut main)?;
            Ok(Output {
                main,
                extra: Vec::new(),
            })
        }
        RunConfig::Benchmark(c) => {
            let report = run_study(&c.dgp, c.n, c.replicates, &c.tests, c.alpha, c.seed)?;
            for t in &report.tests {
                eprintln!(
                    "{:<14} rejection rate {:.3}  KS {:.3}  failures {}",
                    t.label, t.rejection_rate, t.ks, t.failures
                );
            }
            let mut extra = Vec::new();
            if let Some(path) = csv_path {
                let mut buf = Vec::new();
                report.write_csv(&mut buf)?;
                extra.push((path.to_path_buf(), buf));
            }
            Ok(Output {
                main: pretty(&BenchmarkArtifact {
                    config: config_echo,
                    report,
                })?,
                extra,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_cli(["pcopula", "test", "--q", "0"]), 2);
        assert_eq!(run_cli(["pcopula", "test", "--alpha", "1.5"]), 2);
        assert_eq!(run_cli(["pcopula", "bogus"]), 2);
        assert_eq!(run_cli(["pcopula", "test", "--input", "/nonexistent/file.csv"]), 2);
        assert_eq!(run_cli(["pcopula", "simulate", "--n", "10"]), 2);
        assert_eq!(run_cli(["pcopula", "simulate", "--dgp", "H9", "--n", "10"]), 2);
    }

    #[test]
    fn level_parsers() {
        assert!(parse_level("0.05").is_ok());
        assert!(parse_level("0").is_err());
        assert!(parse_level("abc").is_err());
        assert!(parse_delta("0.5").is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/data.csv")), PathBuf::from("out/data.csv.config.json"));
    }
}
