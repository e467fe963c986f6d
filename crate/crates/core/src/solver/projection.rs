use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrsError};

/// Largest violation a projected point may carry.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Points this close to feasible are returned unchanged.
const ACCEPT_TOL: f64 = 1e-12;

/// Euclidean projection onto a closed convex set.
pub trait ProjectionOracle {
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>>;
    /// Distance-like infeasibility measure, zero on the set.
    fn violation(&self, y: &DVector<f64>) -> f64;
    /// True when the set is exactly the unit ball.
    fn is_ball(&self) -> bool {
        false
    }
}

pub fn project_ball(y: &DVector<f64>) -> DVector<f64> {
    let ny = y.norm();
    if ny <= 1.0 {
        y.clone()
    } else {
        y / ny
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BallProjection;

impl ProjectionOracle for BallProjection {
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(project_ball(y))
    }

    fn violation(&self, y: &DVector<f64>) -> f64 {
        (y.norm() - 1.0).max(0.0)
    }

    fn is_ball(&self) -> bool {
        true
    }
}

/// `{ ‖y‖ ≤ 1 } ∩ { aᵢᵀ y ≥ bᵢ }` via Dykstra's alternating projections.
#[derive(Debug, Clone)]
pub struct BallHalfspaceProjection<'a> {
    a: &'a DMatrix<f64>,
    b: &'a DVector<f64>,
    row_norm_sq: Vec<f64>,
    sweeps: usize,
}

impl<'a> BallHalfspaceProjection<'a> {
    pub fn new(a: &'a DMatrix<f64>, b: &'a DVector<f64>, sweeps: usize) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(TrsError::DimensionMismatch("A and b disagree".into()));
        }
        let mut row_norm_sq = Vec::with_capacity(a.nrows());
        for i in 0..a.nrows() {
            let s = a.row(i).norm_squared();
            if s == 0.0 && b[i] > 0.0 {
                return Err(TrsError::InfeasibleRegion);
            }
            row_norm_sq.push(s);
        }
        Ok(Self {
            a,
            b,
            row_norm_sq,
            sweeps,
        })
    }
}

fn halfspace_violation(a: &DMatrix<f64>, b: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        worst = worst.max(b[i] - a.row(i).transpose().dot(y));
    }
    worst
}

impl ProjectionOracle for BallHalfspaceProjection<'_> {
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if self.violation(y) <= ACCEPT_TOL {
            return Ok(y.clone());
        }
        let m = self.a.nrows();
        let n = y.len();
        let mut x = y.clone();
        let mut incr = vec![DVector::<f64>::zeros(n); m + 1];
        let rows: Vec<DVector<f64>> = (0..m).map(|i| self.a.row(i).transpose()).collect();
        for _ in 0..self.sweeps {
            let before = x.clone();
            for i in 0..m {
                if self.row_norm_sq[i] == 0.0 {
                    continue;
                }
                let z = &x + &incr[i];
                let s = rows[i].dot(&z) - self.b[i];
                let next = if s >= 0.0 {
                    z.clone()
                } else {
                    &z - &rows[i] * (s / self.row_norm_sq[i])
                };
                incr[i] = z - &next;
                x = next;
            }
            let z = &x + &incr[m];
            let next = project_ball(&z);
            incr[m] = z - &next;
            x = next;
            let moved = (&x - &before).norm();
            if moved <= 1e-15 * (1.0 + x.norm()) && self.violation(&x) <= ACCEPT_TOL {
                return Ok(x);
            }
        }
        let viol = self.violation(&x);
        if viol <= FEASIBILITY_TOL {
            Ok(x)
        } else {
            Err(TrsError::ProjectionNotConverged(viol))
        }
    }

    fn violation(&self, y: &DVector<f64>) -> f64 {
        (y.norm() - 1.0).max(0.0).max(halfspace_violation(self.a, self.b, y))
    }
}

/// Projection onto the ball intersected with `{ A y ≥ b }`.
pub fn project_ball_and_halfspaces(
    y: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    iters: usize,
) -> Result<DVector<f64>> {
    BallHalfspaceProjection::new(a, b, iters)?.project(y)
}
