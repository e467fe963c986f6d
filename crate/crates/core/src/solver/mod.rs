//! Projected accelerated gradient on the convex surrogate, followed by the
//! boundary push that turns a surrogate minimizer into a feasible point.

pub mod apg;
pub mod pipeline;
pub mod projection;
pub mod settings;

pub use apg::{apg_minimize, objective_scale, ApgOutcome, StopReason};
pub use pipeline::{boundary_push, solve};
pub use projection::{
    project_ball, project_ball_and_halfspaces, BallHalfspaceProjection, BallProjection, ProjectionOracle,
    FEASIBILITY_TOL,
};
pub use settings::SolveSettings;
