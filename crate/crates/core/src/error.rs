use thiserror::Error;

use crate::duality::BoundViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("operator is not Hermitian: ||A - A^dag||_F = {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("operator is not unitary: ||U^dag U - I||_F = {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("not a density matrix: {reason}")]
    NotDensity { reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} did not converge after {steps} steps (last change {last_change:.3e})")]
    NoConvergence {
        what: &'static str,
        steps: usize,
        last_change: f64,
    },

    #[error("pointwise evaluation of a delta component at W = {mean} requires a bandwidth")]
    DeltaEvaluation { mean: f64 },

    #[error("density has imaginary residual {residual:.3e}")]
    ImaginaryResidual { residual: f64 },

    #[error("populations sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("grid resolution too coarse: {reason}")]
    Resolution { reason: String },

    #[error("duality bound violated: {0}")]
    BoundViolation(Box<BoundViolation>),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
