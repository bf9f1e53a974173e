use thiserror::Error;

/// Errors raised by the numerics in this crate.
///
/// Every variant maps to a stable machine-readable [`code`](Error::code) so
/// front ends can report failures without parsing messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symplectic: max |S Ω Sᵀ - Ω| = {defect:.3e}")]
    NotSymplectic { defect: f64 },

    #[error("matrix is not symmetric: max |Γ - Γᵀ| = {asymmetry:.3e}")]
    NotSymmetric { asymmetry: f64 },

    #[error("covariance matrix violates the uncertainty relation: min eig(Γ + iΩ) = {min_eigenvalue:.6e}")]
    NotPhysical { min_eigenvalue: f64 },

    #[error("{modes} modes exceeds the enumeration limit of {limit}; raise n_max to continue")]
    Capacity { modes: usize, limit: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("classification residual {residual:.3e} exceeds the accepted bound {bound:.3e}")]
    Conditioning { residual: f64, bound: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("upper bound violated: value {value:.17e} exceeds bound {bound:.17e}")]
    BoundViolation { value: f64, bound: f64 },
}

impl Error {
    /// Stable identifier for structured error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NotSymplectic { .. } => "not-symplectic",
            Error::NotSymmetric { .. } => "not-symmetric",
            Error::NotPhysical { .. } => "not-physical",
            Error::Capacity { .. } => "capacity",
            Error::Degenerate(_) => "degenerate",
            Error::Conditioning { .. } => "conditioning",
            Error::Unsupported(_) => "unsupported",
            Error::BoundViolation { .. } => "bound-violation",
        }
    }

    /// True for failures caused by physically invalid inputs (as opposed to
    /// malformed requests).
    pub fn is_physics(&self) -> bool {
        matches!(
            self,
            Error::NotSymplectic { .. }
                | Error::NotSymmetric { .. }
                | Error::NotPhysical { .. }
                | Error::Degenerate(_)
                | Error::Conditioning { .. }
                | Error::BoundViolation { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
