use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("direction vector is identically zero")]
    ZeroDirection,

    #[error("matrix is not symmetric (max |a_ij - a_ji| = {0:e})")]
    Asymmetric(f64),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("too few observations: need at least {needed}, found {found}")]
    TooFewObservations { needed: usize, found: usize },

    #[error("input contains a non-finite value")]
    NonFinite,

    #[error("estimating equations underdetermined: {rows} rows for {dims} constraints")]
    Underdetermined { rows: usize, dims: usize },

    #[error("sample covariance matrix is singular")]
    SingularCovariance,

    #[error("variance estimate is not positive ({0:e})")]
    DegenerateVariance(f64),

    #[error("argument out of domain: {0}")]
    Domain(&'static str),

    #[error("series failed to converge within {0} terms")]
    SeriesNonConvergence(usize),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = core::result::Result<T, Error>;
