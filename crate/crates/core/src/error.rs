use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive definite to tolerance (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("scalar {index} is not unimodular (modulus {modulus})")]
    NotUnimodular { index: usize, modulus: f64 },

    #[error("block C_{block} has norm {norm}, expected 1")]
    NormViolation { block: usize, norm: f64 },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("resolvent is near-singular (condition number {condition:.3e})")]
    NearSingular { condition: f64 },

    #[error("tuple is not nilpotent of the required order (residual {residual:.3e})")]
    NotNilpotent { residual: f64 },

    #[error("weight {index} is invalid: {reason}")]
    InvalidWeight { index: usize, reason: String },

    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by numerics (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NearSingular { .. }
                | Error::NotNilpotent { .. }
                | Error::NotAutomorphism(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
