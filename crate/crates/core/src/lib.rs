//! Trust-region subproblem solver.
//!
//! Minimizes `h(y) = yᵀQy + 2gᵀy` over the unit ball (optionally intersected
//! with linear constraints `Ay ≥ b` and with a hollow region removed) through
//! the convex surrogate `f(y) = h(y) + γ(1 - ‖y‖²)` with `γ` a safe estimate of
//! `λ_min(Q)`.

pub mod conditions;
pub mod eigen;
pub mod error;
pub mod format;
pub mod hull;
pub mod instance;
pub mod linalg;
pub mod oracle;
pub mod reformulate;
pub mod solver;

pub use error::{Result, TrsError};
pub use format::{parse_instance, serialize_instance};
pub use instance::{
    validate, Certificate, Diagnostic, DiagnosticKind, Ellipsoid, HollowSpec, LinearConstraintBlock,
    StageTimings, TrsInstance, TrsSolution,
};
pub use linalg::SymSparseMatrix;
pub use solver::{solve, SolveSettings};
