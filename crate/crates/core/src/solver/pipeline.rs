use std::time::Instant;

use nalgebra::DVector;

use super::apg::{apg_minimize, objective_scale, ApgOutcome};
use super::projection::{BallHalfspaceProjection, BallProjection, ProjectionOracle};
use super::settings::SolveSettings;
use crate::conditions::check_condition_relaxation;
use crate::conditions::check_hollow_containment;
use crate::eigen::{min_eigenvalue, spectral_norm_estimate, EigenEstimate};
use crate::error::{Result, TrsError};
use crate::instance::{Certificate, HollowSpec, LinearConstraintBlock, StageTimings, TrsInstance, TrsSolution};
use crate::linalg::{lp_feasible, BoxBounds, LinearSystem, LpOutcome, SymSparseMatrix, DEFAULT_DENSE_CAP};
use crate::reformulate::ReformulatedObjective;

/// Moves `y` to the unit sphere along `d`: returns `y + εd` with `ε ≥ 0` and
/// `‖y + εd‖ = 1`.
///
/// `d` must be an eigenvector of `Q` for `lambda` up to `tol · max(‖Q‖, 1)`.
pub fn boundary_push(
    q: &SymSparseMatrix,
    lambda: f64,
    y: &DVector<f64>,
    d: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>> {
    if d.len() != y.len() || q.dim() != y.len() {
        return Err(TrsError::DimensionMismatch("push direction".into()));
    }
    let nd = d.norm();
    if !(nd > 0.0) {
        return Err(TrsError::BadDirection(f64::INFINITY));
    }
    let d = d / nd;
    let residual = (q.apply(&d) - &d * lambda).norm();
    if residual > tol * q.inf_norm().max(1.0) {
        return Err(TrsError::BadDirection(residual));
    }
    let ny2 = y.norm_squared();
    if ny2 >= 1.0 {
        return Ok(y.clone());
    }
    let p = y.dot(&d);
    let root = (p * p + 1.0 - ny2).sqrt();
    let eps = if p > 0.0 { (1.0 - ny2) / (p + root) } else { root - p };
    Ok(y + d * eps)
}

fn check_region(cons: &LinearConstraintBlock, settings: &SolveSettings) -> Result<()> {
    let n = cons.a.ncols();
    let system = |limit: f64| {
        let mut sys = LinearSystem::new(BoxBounds::uniform(n, limit));
        for i in 0..cons.rows() {
            let row: Vec<f64> = cons.a.row(i).iter().copied().collect();
            sys = sys.geq(&row, cons.b[i]);
        }
        sys
    };
    if let LpOutcome::Feasible(_) = lp_feasible(&system(1.0 / (n as f64).sqrt()))? {
        return Ok(());
    }
    if let LpOutcome::Infeasible = lp_feasible(&system(1.0))? {
        return Err(TrsError::InfeasibleRegion);
    }
    let proj = BallHalfspaceProjection::new(&cons.a, &cons.b, settings.dykstra_iters.max(2000))?;
    match proj.project(&DVector::zeros(n)) {
        Ok(_) => Ok(()),
        Err(TrsError::ProjectionNotConverged(_)) => Err(TrsError::InfeasibleRegion),
        Err(e) => Err(e),
    }
}

fn check_hollow_inputs(inst: &TrsInstance, settings: &SolveSettings) -> Result<()> {
    match &inst.hollow {
        HollowSpec::None => Ok(()),
        HollowSpec::NormLowerBound(l) if !(0.0..=1.0).contains(l) => Err(TrsError::HollowConditionViolated(
            format!("l = {l} outside [0, 1]"),
        )),
        HollowSpec::EllipsoidUnion(list) if list.is_empty() => Ok(()),
        HollowSpec::NormLowerBound(_) if !inst.has_constraints() => Ok(()),
        _ => {
            let report = check_hollow_containment(inst, settings)?;
            if report.is_satisfied() {
                Ok(())
            } else {
                Err(TrsError::HollowConditionViolated(report.details.join("; ")))
            }
        }
    }
}

fn admits_hollow(inst: &TrsInstance, y: &DVector<f64>) -> Result<()> {
    if inst.hollow.admits(y) {
        Ok(())
    } else {
        Err(TrsError::HollowConditionViolated(format!(
            "returned point with ‖y‖ = {} lies in the removed region",
            y.norm()
        )))
    }
}

struct Stage {
    est: EigenEstimate,
    scale: f64,
    timings: StageTimings,
    diagnostics: Vec<String>,
}

impl Stage {
    fn finish(
        self,
        inst: &TrsInstance,
        y: DVector<f64>,
        apg: Option<&ApgOutcome>,
        f_value: f64,
        gamma: f64,
        certificate: Certificate,
        tol: f64,
    ) -> TrsSolution {
        let h_value = inst.h(&y);
        let norm_y = y.norm();
        let tight = certificate != Certificate::NotCertified
            && (certificate == Certificate::ConvexCase
                || ((h_value - f_value).abs() <= tol * self.scale && (norm_y - 1.0).abs() <= tol));
        TrsSolution {
            y,
            h_value,
            f_value,
            norm_y,
            tight,
            certificate,
            iterations: apg.map_or(0, |a| a.iterations),
            gap: apg.map_or(0.0, |a| a.gap),
            gamma,
            scale: self.scale,
            eigen_estimate: self.est,
            timings: self.timings,
            diagnostics: self.diagnostics,
        }
    }
}

/// Solves the instance through the convex surrogate and certifies the result.
///
/// Returns `TightnessNotCertified` (carrying the relaxation solution) when the
/// surrogate minimizer is interior and no admissible push direction exists.
pub fn solve(inst: &TrsInstance, settings: &SolveSettings) -> Result<TrsSolution> {
    settings.validate()?;
    let n = inst.dim();
    if n == 0 {
        return Err(TrsError::InvalidInput("empty instance".into()));
    }
    if let HollowSpec::NormLowerBound(l) = inst.hollow {
        if !(0.0..=1.0).contains(&l) {
            return Err(TrsError::HollowConditionViolated(format!("l = {l} outside [0, 1]")));
        }
    }

    let t0 = Instant::now();
    let est = min_eigenvalue(&inst.q, settings.eigen_epsilon, settings.eigen_delta, settings.seed)?;
    let mut timings = StageTimings {
        eigen: t0.elapsed(),
        ..StageTimings::default()
    };

    let t1 = Instant::now();
    let norm = spectral_norm_estimate(&inst.q, settings.seed)?.max(est.lambda_hat.abs());
    let convex = est.lambda_hat >= 0.0;
    if convex && inst.hollow != HollowSpec::None {
        return Err(TrsError::NotNonconvex(est.lambda_hat));
    }
    let obj = if convex {
        ReformulatedObjective::convex(&inst.q, &inst.g, norm)?
    } else {
        ReformulatedObjective::with_norm(&inst.q, &inst.g, &est, norm)?
    };
    let scale = objective_scale(&obj);
    let gamma = obj.gamma;
    timings.reformulate = t1.elapsed();
    let mut stage = Stage {
        est,
        scale,
        timings,
        diagnostics: Vec::new(),
    };

    if !convex && !inst.has_constraints() && inst.g.iter().all(|v| *v == 0.0) {
        let v = &stage.est.vector_hat;
        let y = v / v.norm();
        let h = inst.h(&y);
        stage.diagnostics.push("g = 0: minimum eigenvector returned directly".into());
        let mut sol = stage.finish(inst, y, None, h, gamma, Certificate::EigenvectorShortcut, settings.certify_tol);
        sol.gap = (h - gamma).max(0.0);
        return Ok(sol);
    }

    if let Some(cons) = inst.constraints.as_ref().filter(|c| c.rows() > 0) {
        check_region(cons, settings)?;
    }
    check_hollow_inputs(inst, settings)?;

    let t2 = Instant::now();
    let ball = BallProjection;
    let polytope;
    let proj: &dyn ProjectionOracle = match inst.constraints.as_ref().filter(|c| c.rows() > 0) {
        Some(c) => {
            polytope = BallHalfspaceProjection::new(&c.a, &c.b, settings.dykstra_iters)?;
            &polytope
        }
        None => &ball,
    };
    let apg = apg_minimize(&obj, proj, settings)?;
    stage.timings.apg = t2.elapsed();

    let t3 = Instant::now();
    if convex {
        let y = apg.y.clone();
        let h = inst.h(&y);
        stage.timings.certify = t3.elapsed();
        return Ok(stage.finish(inst, y, Some(&apg), h, gamma, Certificate::ConvexCase, settings.certify_tol));
    }

    let tol = settings.certify_tol;
    let push_tol = tol.max(2.0 * settings.eigen_epsilon / norm.max(1.0));
    let at_boundary = apg.y.norm() >= 1.0 - tol;
    let mut pushed: Option<DVector<f64>> = None;
    if !inst.has_constraints() {
        let v = &stage.est.vector_hat;
        let d = if inst.g.dot(v) > 0.0 { -v } else { v.clone() };
        if !at_boundary || apg.y.norm() < 1.0 {
            match boundary_push(&inst.q, stage.est.lambda_hat, &apg.y, &d, push_tol) {
                Ok(y) => pushed = Some(y),
                Err(TrsError::BadDirection(r)) => stage
                    .diagnostics
                    .push(format!("eigenvector residual {r:e} too large to push")),
                Err(e) => return Err(e),
            }
        }
    } else if !at_boundary || apg.y.norm() < 1.0 {
        if n <= settings.dense_cap.min(DEFAULT_DENSE_CAP) {
            match check_condition_relaxation(inst) {
                Ok(report) => match report.witness() {
                    Some(d) => {
                        let lambda = inst.q.quad_form(d) / d.norm_squared();
                        match boundary_push(&inst.q, lambda, &apg.y, d, push_tol) {
                            Ok(y) => pushed = Some(y),
                            Err(TrsError::BadDirection(r)) => stage
                                .diagnostics
                                .push(format!("witness residual {r:e} too large to push")),
                            Err(e) => return Err(e),
                        }
                    }
                    None => stage
                        .diagnostics
                        .push(format!("relaxation condition {}", report.status.name())),
                },
                Err(e) => stage.diagnostics.push(format!("relaxation condition check failed: {e}")),
            }
        } else {
            stage
                .diagnostics
                .push(format!("n = {n} above the dense cap; condition checks skipped"));
        }
    }

    let (y, certificate) = match pushed {
        Some(y) if apg.y.norm() < 1.0 && !at_boundary => (y, Certificate::PushedAlongEigenvector),
        Some(y) => (y, Certificate::BoundaryOptimum),
        None if at_boundary => {
            let ny = apg.y.norm();
            (if ny > 1.0 { &apg.y / ny } else { apg.y.clone() }, Certificate::BoundaryOptimum)
        }
        None => {
            stage.timings.certify = t3.elapsed();
            let diagnostics = stage.diagnostics.clone();
            let sol = stage.finish(
                inst,
                apg.y.clone(),
                Some(&apg),
                apg.f_value,
                gamma,
                Certificate::NotCertified,
                tol,
            );
            return Err(TrsError::TightnessNotCertified {
                solution: Box::new(sol),
                diagnostics,
            });
        }
    };
    admits_hollow(inst, &y)?;
    stage.timings.certify = t3.elapsed();
    Ok(stage.finish(inst, y, Some(&apg), apg.f_value, gamma, certificate, tol))
}
