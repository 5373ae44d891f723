use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid function element: {0}")]
    InvalidElement(String),

    #[error("norm of order {p} > 0 requested for an element containing an indicator")]
    RaisedNormOfNonSchwartz { p: u32 },

    #[error("scaling parameter z must be nonzero")]
    ZeroScaling,

    #[error("z = {z} outside the sector S_alpha (alpha = {alpha})")]
    SectorViolation { z: Complex64, alpha: f64 },

    #[error("time parameter must be positive, got {0}")]
    NonpositiveTime(f64),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("theta series diverges: {0}")]
    DivergentTheta(String),

    #[error("Gram matrix is numerically singular (condition number {condition:e})")]
    SingularGram { condition: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Inputs outside the mathematical domain (sector, Re(a²), theta domain, bad payloads).
    Domain,
    /// The inputs were admissible but the numerics did not deliver.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SingularGram { .. } | Error::QuadratureFailure(_) => ErrorClass::Numerical,
            _ => ErrorClass::Domain,
        }
    }
}
