//! Numerical kernels: sparse symmetric products, dense factorizations and a
//! small simplex solver.

pub mod dense;
pub mod lp;
pub mod sparse;

pub use dense::{cholesky, dense_eig, dense_eig_capped, null_space_basis, rank, DenseEig, DEFAULT_DENSE_CAP};
pub use lp::{lp_feasible, lp_minimize, BoxBounds, LinearSystem, LpOutcome, LpSolution};
pub use sparse::SymSparseMatrix;
