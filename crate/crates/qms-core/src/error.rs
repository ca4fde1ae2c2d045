use thiserror::Error;

/// Error type shared by every module of the library.
#[derive(Debug, Error)]
pub enum QmsError {
    #[error("hermitian eigensolver failed to converge (dim {dim})")]
    NonConvergence { dim: usize },

    #[error("scalar function undefined on spectrum: {0}")]
    DomainError(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("reference state is rank-deficient (min eigenvalue {min_eig:.3e})")]
    SingularReference { min_eig: f64 },

    #[error("map is not GNS-symmetric to its reference (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("fixed-point eigenspace is not closed under products (residual {residual:.3e})")]
    AlgebraClosureFailure { residual: f64 },

    #[error("CP sandwich not reached within k_max = {k_max} channel powers")]
    NotReached { k_max: usize },

    #[error("bisection bracket not found: {0}")]
    BracketNotFound(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("quadrature budget exceeded ({subdivisions} subdivisions, est. error {error:.3e})")]
    QuadratureBudgetExceeded { subdivisions: usize, error: f64 },

    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("jump operator {index} violates the modular eigenvector condition (residual {residual:.3e})")]
    ModularMismatch { index: usize, residual: f64 },

    #[error("model spec parse error: {0}")]
    SpecParseError(String),
}
