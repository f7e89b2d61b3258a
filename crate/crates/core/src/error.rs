use thiserror::Error;

/// Errors raised by the arithmetic, group and representation layers.
///
/// Verification failures are never reported through this type; they end up
/// as entries in the corresponding report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("characteristic {0} is even; only odd characteristic is supported")]
    EvenCharacteristic(u64),

    #[error("{0} is not an odd prime power")]
    NotPrimePower(u64),

    #[error("{what} of size {size} exceeds the configured bound {bound}")]
    BoundExceeded { what: &'static str, size: u64, bound: u64 },

    #[error("no irreducible polynomial of degree {degree} over F_{p} found")]
    NoIrreducible { p: u64, degree: u32 },

    #[error("argument must be nonzero")]
    ZeroArgument,

    #[error("element is not in the subfield F_q")]
    NotInSubfield,

    #[error("division by zero")]
    DivisionByZero,

    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),

    #[error("matrix is not hermitian")]
    NotHermitian,

    #[error("matrix is singular (not in A^x)")]
    Singular,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "q = {0} is not allowed: the Bruhat-like presentation of U(n,n)(F_q^2/F_q) \
         used for the Weil representation is only available for odd q > 3"
    )]
    PresentationHypothesis(u64),

    #[error("element is not in SL*^-1(2, A_n)")]
    NotMember,

    #[error("Bruhat decomposition failed: no hermitian s with cs + d invertible")]
    DecompositionFailed,

    #[error("sign resolution failed: {0}")]
    SignResolution(String),

    #[error("kappa resolution failed: {0}")]
    KappaResolution(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
