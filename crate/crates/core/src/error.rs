use thiserror::Error;

use crate::instance::TrsSolution;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum TrsError {
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("iteration did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("simplex iteration guard tripped after {0} pivots")]
    CycleGuardTripped(usize),

    #[error("LP witness violates constraints by {0:e}")]
    LpNumericalFailure(f64),

    #[error("Lanczos residual {residual:e} still above tolerance after {iterations} steps")]
    IterationCapExceeded { iterations: usize, residual: f64 },

    #[error("estimated minimum eigenvalue {0} is not negative; objective is already convex")]
    NotNonconvex(f64),

    #[error("projection did not converge (violation {0:e})")]
    ProjectionNotConverged(f64),

    #[error("feasible region is empty")]
    InfeasibleRegion,

    #[error("accelerated gradient hit its iteration cap (gap estimate {best_gap:e})")]
    MaxItersExceeded { best_point: Vec<f64>, best_gap: f64 },

    #[error("push direction is not an eigenvector of the minimum eigenvalue (residual {0:e})")]
    BadDirection(f64),

    #[error("convex relaxation is not certified tight; relaxation value {} is a lower bound", .solution.f_value)]
    TightnessNotCertified {
        solution: Box<TrsSolution>,
        diagnostics: Vec<String>,
    },

    #[error("hollow region condition violated: {0}")]
    HollowConditionViolated(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("W_t spectrum property violated at t = {t}: {negatives} negative eigenvalues")]
    SpectrumPropertyViolated { t: f64, negatives: usize },

    #[error("no convex-combination witness available: {0}")]
    WitnessUnavailable(String),

    #[error("no feasible grid point")]
    NoFeasibleGridPoint,
}

pub type Result<T> = std::result::Result<T, TrsError>;
