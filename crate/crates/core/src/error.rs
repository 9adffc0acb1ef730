use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive-definite")]
    NotSpd,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("covariance matrix is singular (not positive-definite even after the ridge floor)")]
    SingularCovariance,

    #[error("line search failed: no acceptable step after {backtracks} backtracks")]
    LineSearchFailed { backtracks: usize },

    #[error("component {component} has weight sum {weight_sum:.3e} below the minimum")]
    EmptyComponent { component: usize, weight_sum: f64 },

    #[error("component {component} failed at EM iteration {iteration}: {source}")]
    Component {
        component: usize,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("initialization produced an empty component")]
    DegenerateInit,

    #[error("label vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid support pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical routines (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        if let Error::Component { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::NotSpd
                | Error::SingularCovariance
                | Error::LineSearchFailed { .. }
                | Error::EmptyComponent { .. }
                | Error::DegenerateInit
        )
    }

    /// True for I/O and decoding failures.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
