//! Data-generating processes for level and power studies, and the replicate
//! runner that summarizes p-values by Kolmogorov-Smirnov distance and
//! rejection rate.

mod dgp;
mod study;

pub use dgp::{
    asymmetric_laplace, asymmetric_laplace_median, draw_coefficients, gumbel, local_gamma_sq,
    sample_dgp, sample_local_alternative, standard_normal, CoefficientRule, Coefficients, DgpSpec,
    Process, LAPLACE_KAPPA,
};
pub use study::{
    derive_seed, ks_statistic, ks_uniform, run_study, ReplicateError, RunInfo, SimReport,
    TestSpec, TestSummary,
};
