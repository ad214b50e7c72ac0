use thiserror::Error;

/// Errors raised by every layer of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("incompatible domains: {0}")]
    IncompatibleDomains(String),
    #[error("not in L^p: {0}")]
    NotInLp(String),
    #[error("t = {t} lies outside [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("discontinuous junction at t = {t}: mismatch {mismatch:e}")]
    DiscontinuousJunction { t: f64, mismatch: f64 },
    #[error("derivative not recoverable at t = {0}: point lies on a jump")]
    NonRecoverable(f64),
    #[error("outside logarithm chart: {0}")]
    OutOfChart(String),
    #[error("incompatible groups: {0}")]
    Incompatible(String),
    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),
    #[error("inconsistent curve: {0}")]
    InconsistentCurve(String),
    #[error("numerical singularity: {0}")]
    NumericalSingularity(String),
    #[error("no convergence: residual {residual:e} > tolerance {tol:e} after {refinements} refinements")]
    NoConvergence {
        residual: f64,
        tol: f64,
        refinements: usize,
    },
    #[error("invalid control: {0}")]
    InvalidControl(String),
    #[error("control is not continuous: {0}")]
    NotContinuous(String),
}

pub type Result<T> = std::result::Result<T, Error>;
