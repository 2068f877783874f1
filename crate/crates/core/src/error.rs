use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(usize, usize, &'static str),

    #[error("rho = {0} is outside the admissible range {1}")]
    RhoOutOfRange(f64, &'static str),

    #[error("centroids are required for this operation but none were supplied")]
    MissingCentroids,

    #[error("count grid is incomplete: no row for area `{area}`, period `{period}`")]
    MissingCell { area: String, period: String },

    #[error("duplicate row for area `{area}`, period `{period}`")]
    DuplicateCell { area: String, period: String },

    #[error("expected count must be strictly positive (area `{area}`, period `{period}`, e = {value})")]
    NonPositiveExpected {
        area: String,
        period: String,
        value: f64,
    },

    #[error("observed count must be non-negative (area `{area}`, period `{period}`, y = {value})")]
    NegativeCount {
        area: String,
        period: String,
        value: i64,
    },

    #[error("random-walk variance has no likelihood contribution when there is a single period")]
    DegenerateT,

    #[error("operation `{op}` is not defined for the `{variant}` smoothing variant")]
    VariantMismatch { op: &'static str, variant: &'static str },

    #[error("class means lost their strict ordering at period {period}")]
    OrderingViolated { period: usize },

    #[error("non-finite log posterior in {block} at sweep {sweep}: {state}")]
    NonFiniteLogPosterior {
        block: &'static str,
        sweep: usize,
        state: String,
    },

    #[error("shape mismatch: {0} vs {1}")]
    ShapeMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing fit artifact {0}")]
    MissingArtifacts(PathBuf),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed or inconsistent input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidEdge(..)
                | Error::MissingCentroids
                | Error::MissingCell { .. }
                | Error::DuplicateCell { .. }
                | Error::NonPositiveExpected { .. }
                | Error::NegativeCount { .. }
                | Error::ShapeMismatch(..)
                | Error::Parse { .. }
                | Error::Csv(..)
        )
    }

    /// True for failures of the numerical machinery itself.
    pub fn is_numerical_error(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteLogPosterior { .. } | Error::OrderingViolated { .. }
        )
    }
}
