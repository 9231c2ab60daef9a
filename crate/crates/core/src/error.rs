use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input or I/O.
    Input,
    /// A mathematical precondition does not hold for the given data.
    Precondition,
    /// Two independent computations of the same quantity disagree.
    Consistency,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("invalid tolerance `{name}` = {value}: must lie in (0, 1)")]
    Tolerance { name: &'static str, value: f64 },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {eigenvalue:.6e})")]
    NotPsd { eigenvalue: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {eigenvalue:.6e})")]
    NotPd { eigenvalue: f64 },

    #[error("matrix is not stable: eigenvalue {eigenvalue} has nonnegative real part")]
    Spectrum { eigenvalue: Complex64 },

    #[error("system is not semi-dissipative: Hermitian part has eigenvalue {eigenvalue:.6e}")]
    NotSemiDissipative { eigenvalue: f64 },

    #[error("system matrix has the eigenvalue 0 (found {eigenvalue})")]
    ZeroEigenvalue { eigenvalue: Complex64 },

    #[error("system is not semi-contractive: largest singular value {sigma_max:.12} exceeds 1 by {gap:.3e}")]
    NotSemiContractive { sigma_max: f64, gap: f64 },

    #[error("system matrix has the eigenvalue 1 (found {eigenvalue})")]
    UnitEigenvalue { eigenvalue: Complex64 },

    #[error("index criteria disagree at level {level}: {detail}")]
    CriterionMismatch { level: usize, detail: String },

    #[error("the system has no hypocoercivity index")]
    IndexMissing,

    #[error("index mismatch: expected {expected}, got {got}")]
    IndexMismatch { expected: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("transform pole {pole} lies on the spectrum (distance {distance:.3e})")]
    PoleOnSpectrum { pole: Complex64, distance: f64 },

    #[error("stencil with halfwidth {halfwidth} is too short for derivative order {order}")]
    StencilTooShort { order: usize, halfwidth: usize },

    #[error("order m = {m} exceeds the supported maximum {max}")]
    OrderTooLarge { m: usize, max: usize },

    #[error("system is not asymptotically stable (margin {margin:.6e})")]
    NotStable { margin: f64 },

    #[error("a dominant eigenvalue ({eigenvalue}) is defective; a positive epsilon is required")]
    DefectiveNeedsEpsilon { eigenvalue: Complex64 },

    #[error("marginally stable system; a positive epsilon is required")]
    MarginalNeedsEpsilon,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(&'static str),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_) | Error::NonFinite => ErrorKind::Input,
            Error::CriterionMismatch { .. } | Error::NoConvergence(_) => ErrorKind::Consistency,
            _ => ErrorKind::Precondition,
        }
    }
}
