use std::collections::VecDeque;

use nalgebra::DVector;

use super::projection::ProjectionOracle;
use super::settings::SolveSettings;
use crate::error::{Result, TrsError};
use crate::reformulate::ReformulatedObjective;

/// Window for the stagnation test.
const STAGNATION_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Certified gap fell below the target.
    GapCertified,
    /// Objective improved by less than `1e-3 · target` over the window.
    Stagnation,
}

#[derive(Debug, Clone)]
pub struct ApgOutcome {
    pub y: DVector<f64>,
    pub f_value: f64,
    /// `f(y) - LB` with `LB` the best certified lower bound on `min f`.
    pub gap: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub stop: StopReason,
}

/// `max(1, ‖Q‖_est + ‖g‖)`.
pub fn objective_scale(obj: &ReformulatedObjective<'_>) -> f64 {
    (obj.norm_estimate + obj.g().norm()).max(1.0)
}

/// Accelerated projected gradient with adaptive (function-value) restart.
///
/// Two lower bounds on `min f` are tracked. For any feasible `u` with
/// `‖u‖ ≤ 1`, the gradient mapping `G = L (z - y⁺)` gives
/// `f(y⁺) - f(u) ≤ ‖G‖ (‖z‖ + 1) - ‖G‖² / 2L`; on the plain ball the linear
/// minimization bound `f(y) - ∇f(y)ᵀy - ‖∇f(y)‖` is also available.
pub fn apg_minimize(
    obj: &ReformulatedObjective<'_>,
    proj: &dyn ProjectionOracle,
    settings: &SolveSettings,
) -> Result<ApgOutcome> {
    let l = obj.smoothness_l;
    if !(l.is_finite() && l > 0.0) {
        return Err(TrsError::InvalidInput(format!("smoothness constant {l}")));
    }
    let q = obj.q();
    let target = settings.apg_gap * objective_scale(obj);
    let cap = settings.apg_cap(l, target);

    let mut y = proj.project(&DVector::zeros(obj.dim()))?;
    let mut qy = q.apply(&y);
    let mut f_y = obj.value_with(&y, &qy);
    let mut z = y.clone();
    let mut qz = qy.clone();
    let mut t = 1.0_f64;
    let mut lower = f64::NEG_INFINITY;
    let mut restarts = 0;
    let mut history: VecDeque<f64> = VecDeque::with_capacity(STAGNATION_WINDOW + 1);

    for k in 1..=cap {
        let (_, grad_z) = obj.value_grad_with(&z, &qz);
        let step = &z - &grad_z / l;
        let y_new = proj.project(&step)?;
        let qy_new = q.apply(&y_new);
        let (f_new, grad_new) = obj.value_grad_with(&y_new, &qy_new);

        let gmap = (&z - &y_new).norm() * l;
        let lb_map = f_new - gmap * (z.norm() + 1.0) + gmap * gmap / (2.0 * l);
        lower = lower.max(lb_map);
        if proj.is_ball() {
            let lb_lin = f_new - grad_new.dot(&y_new) - grad_new.norm();
            lower = lower.max(lb_lin);
        }

        if f_new > f_y {
            // Momentum overshot: restart from the current iterate.
            restarts += 1;
            t = 1.0;
            z.copy_from(&y);
            qz.copy_from(&qy);
        } else {
            let y_prev = std::mem::replace(&mut y, y_new);
            let qy_prev = std::mem::replace(&mut qy, qy_new);
            f_y = f_new;
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            z = &y + (&y - &y_prev) * beta;
            qz = &qy + (&qy - &qy_prev) * beta;
            t = t_next;
        }

        let gap = (f_y - lower).max(0.0);
        let stop = if gap <= target {
            Some(StopReason::GapCertified)
        } else if history.len() == STAGNATION_WINDOW && history[0] - f_y < 1e-3 * target {
            Some(StopReason::Stagnation)
        } else {
            None
        };
        if let Some(stop) = stop {
            return Ok(ApgOutcome {
                y,
                f_value: f_y,
                gap,
                lower_bound: lower,
                iterations: k,
                restarts,
                stop,
            });
        }
        if history.len() == STAGNATION_WINDOW {
            history.pop_front();
        }
        history.push_back(f_y);
    }
    Err(TrsError::MaxItersExceeded {
        best_point: y.iter().copied().collect(),
        best_gap: (f_y - lower).max(0.0),
    })
}
