//! Conditional independence testing with partial copulas.
//!
//! The conditional distributions of `X | Z` and `Y | Z` are estimated by
//! L1-penalized linear quantile regression on a grid of levels, turned into
//! conditional CDFs by monotone interpolation, and used to map each
//! observation to its nonparametric residual. Independence of the two
//! residuals is then tested with a generalized correlation built from
//! trimmed Spearman functions.
//!
//! ```no_run
//! use partial_copula::{dataset::{ColumnSpec, Dataset}, gencorr::{pc_test, PcConfig}};
//!
//! let data = Dataset::load_csv("data.csv", &ColumnSpec::new("x", "y", &["z1", "z2"]))?;
//! let result = pc_test(&data, &PcConfig::default())?;
//! println!("p = {}", result.p_value);
//! # Ok::<(), partial_copula::Error>(())
//! ```

// `!(a > b)` also sends NaN to the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod basis;
pub mod cdf;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod gencorr;
pub mod qreg;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
