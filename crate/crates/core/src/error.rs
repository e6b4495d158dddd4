use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FwError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("operator dimension {0} is not a multiple of 4")]
    NotBispinor(usize),

    #[error("zero mode at energy {energy:e} (tolerance {tolerance:e}); the sign operator is undefined")]
    ZeroMode { energy: f64, tolerance: f64 },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value {value} at grid point {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("{transform} is not applicable: {reason}")]
    NotApplicable { transform: String, reason: String },

    #[error("algebraic identity violated: {0}")]
    Identity(String),
}

pub type Result<T, E = FwError> = std::result::Result<T, E>;
