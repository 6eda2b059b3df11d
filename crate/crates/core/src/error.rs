use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: row {row}, column '{column}': cannot parse '{value}' as a number")]
    Format {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no usable examples: {0}")]
    Empty(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("feature '{0}' has no observed values; cannot derive bounds or statistics")]
    FullyMissingFeature(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("finite bounds required for missing cell ({row}, {col})")]
    UnboundedCell { row: usize, col: usize },

    #[error("kernel domain error: {0}")]
    Domain(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("{what}: {count} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("solver did not converge after {iterations} iterations (violation {violation:.3e})")]
    NoConvergence {
        iterations: usize,
        violation: f64,
        /// Best iterate found before giving up.
        best: Vec<f64>,
    },
}
