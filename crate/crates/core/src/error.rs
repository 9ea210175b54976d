use thiserror::Error;

/// Errors raised by the phase-space, gate, tableau and measurement layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode count must be at least 1")]
    ZeroModes,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("mode index {index} out of range for {n} modes")]
    ModeOutOfRange { index: usize, n: usize },
    #[error("mode {0} appears more than once")]
    RepeatedMode(usize),
    #[error("matrix is not symplectic (defect {defect:e})")]
    NotSymplectic { defect: f64 },
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("covariance violates the uncertainty relation (minimum eigenvalue {min_eigenvalue:e})")]
    Unphysical { min_eigenvalue: f64 },
    #[error("covariance matrix is singular")]
    SingularCovariance,
    #[error("transmissivity {0} outside [0, 1]")]
    Transmissivity(f64),
    #[error("marginal variance {0:e} is not positive")]
    NonPositiveVariance(f64),
    #[error("tableau rows lost rank (singular value ratio {0:e})")]
    RankDegraded(f64),
    #[error("nullifier rows do not describe a pure Gaussian state")]
    InvalidNullifiers,
    #[error("cannot trace out the only remaining mode")]
    LastMode,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}
