use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("breakpoints must be strictly increasing (index {index})")]
    NonMonotoneBreakpoints { index: usize },
    #[error("potential support must be exactly [-1/2, 1/2], got [{lo}, {hi}]")]
    SupportOutOfRange { lo: f64, hi: f64 },
    #[error("non-finite value at piece {index}")]
    NonFiniteValue { index: usize },
    #[error("expected {expected} values for the given breakpoints, got {got}")]
    PieceCountMismatch { expected: usize, got: usize },
    #[error("|k| = {modulus} is inside the exclusion zone around the pole at k = 0")]
    KTooSmall { modulus: f64 },
    #[error("spectral parameter must be real, got imaginary part {im}")]
    NonRealK { im: f64 },
    #[error("spectral parameter must be positive, got {k}")]
    NonPositiveK { k: f64 },
    #[error("energy {energy} is outside the range of the closed form")]
    OutOfClosedFormRange { energy: f64 },
    #[error("reflection coefficient vanishes (|b| = {modulus}); the conjugated group consists of rotations")]
    ZeroReflection { modulus: f64 },
    #[error("no word of length <= {max_len} reached the norm threshold (best norm {best_norm})")]
    WitnessNotFound { max_len: usize, best_norm: f64 },
    #[error("integer overflow constructing N_j for j = {j}")]
    Overflow { j: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("computed transfer matrix deviates from the expected form by {deviation}")]
    SpecMismatch { deviation: f64 },
    #[error("numeric overflow after {step} steps")]
    NumericOverflow { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
