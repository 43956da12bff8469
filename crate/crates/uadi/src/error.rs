use num_complex::Complex64;
use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum UadiError {
    #[error("shifted matrix A + ({shift})E is singular")]
    SingularShiftedMatrix { shift: Complex64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("spectra overlap: eigenvalues {left} and {right} are not separated")]
    SpectraOverlap { left: Complex64, right: Complex64 },
    #[error("right-hand side is not Hermitian (relative asymmetry {0:.3e})")]
    NonHermitianRHS(f64),
    #[error("eigenvalue iteration failed to converge")]
    EigFailure,
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("missing matrix `{0}` in manifest")]
    MissingMatrix(String),
    #[error("descriptor matrix E is singular")]
    SingularE,
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("shift {0} is not in the open left half-plane")]
    UnstableShift(Complex64),
    #[error("complex shift {0} is not followed by its conjugate")]
    UnpairedComplexShift(Complex64),
    #[error("shift collision: alpha = {alpha}, beta = {beta} gives alpha + beta = 0")]
    ShiftCollision { alpha: Complex64, beta: Complex64 },
    #[error("capacitance matrix of the low-rank update is singular")]
    InnerSolveSingular,
    #[error("equation {equation} is infeasible: {reason}")]
    InfeasibleHard { equation: String, reason: String },
    #[error("extraction for {0} is singular")]
    ExtractionSingular(String),
    #[error("equation {0} is not enabled")]
    EquationSkipped(String),
    #[error("residual factor is zero; no shift required")]
    ZeroResidual,
    #[error("non-finite shift candidate {0}")]
    NonFiniteShift(Complex64),
    #[error("projected descriptor matrix is singular")]
    SingularProjectedE,
    #[error("reduced model variant {0} is unavailable")]
    VariantUnavailable(String),
    #[error("requested order {requested} exceeds numerical rank {rank}")]
    RankDeficient { requested: usize, rank: usize },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, UadiError>;

impl From<std::io::Error> for UadiError {
    fn from(e: std::io::Error) -> Self {
        UadiError::Io(e.to_string())
    }
}
