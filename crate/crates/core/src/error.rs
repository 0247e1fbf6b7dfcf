use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not symplectic (residual {0:e})")]
    NotSymplectic(f64),

    #[error("unphysical state: smallest symplectic eigenvalue {0:e} is below 1/2")]
    Unphysical(f64),

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("loop hafnian: {0}")]
    Hafnian(String),

    #[error("g2(0) is undefined: {0}")]
    G2Undefined(&'static str),

    #[error("negative probability {value:e} for n = {n}")]
    NegativeProbability { n: usize, value: f64 },

    #[error("unsupported moment order {0} (at most 4)")]
    UnsupportedOrder(usize),

    #[error("truncation too coarse: tail mass {tail_mass:e} exceeds {tolerance:e} at cutoff {dim}")]
    Truncation { dim: usize, tail_mass: f64, tolerance: f64 },

    #[error("regime outside validity: {0}")]
    Regime(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
