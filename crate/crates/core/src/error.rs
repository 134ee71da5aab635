use thiserror::Error;

use crate::qreg::QuantileFit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("schema error: column `{0}` not found")]
    MissingColumn(String),

    #[error("parse error at data row {row}, column `{column}`: {value:?} is not a finite number")]
    Parse {
        /// 1-based data row (header excluded).
        row: usize,
        column: String,
        value: String,
    },

    #[error("empty data: no observations")]
    EmptyData,

    #[error("shape error: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate design: column {column} of W is identically zero")]
    DegenerateDesign { column: usize },

    #[error("quantile solver did not converge after {iterations} iterations (relative gap {gap:.3e})")]
    NonConvergence {
        iterations: usize,
        gap: f64,
        best: Box<QuantileFit>,
    },

    #[error("quantile fit failed at tau = {tau}: {source}")]
    Fit {
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
