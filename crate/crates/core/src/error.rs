use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library reports. Variants carry the offending point or
/// quantity so callers (the CLI in particular) can name it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("denominator vanishes at base point {0}")]
    PoleAtBase(Complex64),
    #[error("jet shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("division by a jet with zero constant term")]
    DivisionBySingularJet,
    #[error("jet order exhausted: need order >= {needed}, have {have}")]
    OrderExhausted { needed: usize, have: usize },
    #[error("base value {0} lies on the branch cut of the principal logarithm")]
    BranchCut(Complex64),
    #[error("complex power of a jet with zero base value")]
    ZeroBase,
    #[error("invalid dimension N = {0} (need N >= 2)")]
    InvalidDimension(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("vector has zero norm at {0}")]
    NullVector(Complex64),
    #[error("tower depth k = {k} exceeds N - 1 = {max}")]
    TowerDepthExceeded { k: usize, max: usize },
    #[error("quadrature did not converge: {0}")]
    QuadratureDivergence(String),
    #[error("matrix is not anti-Hermitian traceless (defect {0:e})")]
    NotAntiHermitian(f64),
    #[error("integration path passes within {clearance:e} of singular point {point}")]
    PathThroughSingularity { point: Complex64, clearance: f64 },
    #[error("refinement disagreement {0:e} exceeds tolerance")]
    NonConvergent(f64),
    #[error("degenerate metric at {point}: g12 = {g12:e}")]
    DegenerateMetric { point: Complex64, g12: f64 },
    #[error("F vanishes at {0}")]
    ZeroOfF(Complex64),
    #[error("root finding failed: {0}")]
    RootFindingFailure(String),
    #[error("roots closer than {0:e} cannot be separated")]
    ClusteredRoots(f64),
    #[error("seed {0} is within the exclusion radius of a critical point")]
    SeedAtCriticalPoint(Complex64),
    #[error("trajectory invariant drift {0:e} exceeds 1e-4; reduce the step")]
    StepTooLarge(f64),
}

impl CoreError {
    /// Failures of an iterative or quadrature method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CoreError::QuadratureDivergence(_)
                | CoreError::NonConvergent(_)
                | CoreError::StepTooLarge(_)
                | CoreError::RootFindingFailure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
