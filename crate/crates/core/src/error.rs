use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("function `{name}` at byte {offset} takes 1 argument, got {found}")]
    Arity {
        name: String,
        offset: usize,
        found: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("expression uses x{index} but the point has dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("derivative order {order} in coordinate {coordinate} exceeds the limit of {limit}")]
    KernelOrder {
        coordinate: usize,
        order: u32,
        limit: u32,
    },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("sampling strategy `{strategy}` is not supported on {domain}")]
    UnsupportedStrategy {
        strategy: &'static str,
        domain: &'static str,
    },

    #[error("point {point:?} is not on the domain boundary")]
    NotOnBoundary { point: Vec<f64> },

    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),

    #[error("covariance matrix could not be factorized; last jitter tried was {jitter:e}")]
    IllConditioned { jitter: f64 },

    #[error("posterior variance {value:e} is negative beyond round-off tolerance")]
    NegativeVariance { value: f64 },

    #[error("invalid lengthscale grid: {0}")]
    InvalidGrid(String),

    #[error("assembly failed at every lengthscale in the grid")]
    AllGridPointsFailed,

    #[error("unknown case study `{0}`")]
    UnknownCase(String),

    #[error("singular tridiagonal system at row {row}")]
    SingularTridiagonal { row: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("no reference solution is available for this problem")]
    NoOracle,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure is numerical (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. }
                | Error::NegativeVariance { .. }
                | Error::AllGridPointsFailed
                | Error::SingularTridiagonal { .. }
        )
    }
}
