//! Error type shared by every module of the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Failure modes of the numerical pipeline and of the I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spectral parameter {0} is a branch point of the resolvent")]
    BranchPoint(Complex64),
    #[error("kernel evaluated at coincident points")]
    CoincidentPoints,
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("allocation of a {0}x{0} matrix exceeds the configured limit")]
    AllocationFailure(usize),
    #[error("determinant vanishes (|det| = {abs:.3e}) on the contour at {at}")]
    BoundaryZero { at: Complex64, abs: f64 },
    #[error("phase increment could not be resolved near {0}")]
    PhaseUnresolved(Complex64),
    #[error("I + K is ill conditioned at {at} (condition estimate {cond:.3e})")]
    NearResonanceIllConditioned { at: Complex64, cond: f64 },
    #[error("search did not complete: {0}")]
    IncompleteCoverage(String),
    #[error("determinant vanishes at the Jensen base point")]
    BasePointZero,
    #[error("unsupported potential channel: {0}")]
    UnsupportedChannel(String),
    #[error("radial integration failed: {0}")]
    StiffIntegration(String),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("validation error: {0}")]
    ValidationError(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::ParseError(e.to_string())
    }
}
