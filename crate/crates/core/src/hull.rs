//! Convex hull of the epigraph set
//! `X = { (y, x) : ‖y‖ ≤ 1, Ay ≥ b, h(y) ≤ x }`.
//!
//! When some `λ_Q`-eigenvector lies in `Null(A)`, `conv(X)` is cut out by the
//! ball, the side constraints and `f(y) ≤ x` with
//! `f(y) = yᵀ(Q - λ_Q I)y + 2gᵀy + λ_Q`. The aggregation
//! `W_t = (1 - t) W_0 + t W_1` of the two quadratic forms defining `X` keeps a
//! single negative eigenvalue up to `t = s = 1/(1 - λ_Q)`.

use nalgebra::{DMatrix, DVector};

use crate::conditions::{check_condition_convexify, ConditionStatus};
use crate::error::{Result, TrsError};
use crate::instance::TrsInstance;
use crate::linalg::{dense_eig, dense_eig_capped, DEFAULT_DENSE_CAP};

/// Relative tolerance for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Eigenvalues below `-SIGN_TOL · ‖W_t‖` count as negative.
pub const SIGN_TOL: f64 = 1e-10;
/// `W_s` must have an eigenvalue within `SINGULAR_TOL · ‖W_s‖` of zero.
pub const SINGULAR_TOL: f64 = 1e-8;

/// A point `(y, 1, x_last)` of the homogenized epigraph slice.
#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphPoint {
    pub y: DVector<f64>,
    pub x_last: f64,
}

impl EpigraphPoint {
    pub fn new(y: DVector<f64>, x_last: f64) -> Self {
        Self { y, x_last }
    }
}

pub fn compute_s(lambda_q: f64) -> Result<f64> {
    if !(lambda_q < 0.0) {
        return Err(TrsError::DomainError(format!("s needs λ_Q < 0, got {lambda_q}")));
    }
    Ok(1.0 / (1.0 - lambda_q))
}

/// `W_0 = diag(I, -1, 0)`; `W_1` has blocks `Q`, `g` and `-1/2` in the last
/// off-diagonal position.
pub fn build_wt(inst: &TrsInstance, t: f64) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(TrsError::DomainError(format!("t = {t} outside [0, 1]")));
    }
    let n = inst.dim();
    let q = inst.q.to_dense();
    let mut w = DMatrix::zeros(n + 2, n + 2);
    for i in 0..n {
        for j in 0..n {
            w[(i, j)] = t * q[(i, j)];
        }
        w[(i, i)] += 1.0 - t;
        w[(i, n)] = t * inst.g[i];
        w[(n, i)] = t * inst.g[i];
    }
    w[(n, n)] = -(1.0 - t);
    w[(n, n + 1)] = -0.5 * t;
    w[(n + 1, n)] = -0.5 * t;
    Ok(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub lambda_q: f64,
    pub s: f64,
    /// `(t, number of negative eigenvalues of W_t)` along the grid.
    pub counts: Vec<(f64, usize)>,
    /// Smallest `|eigenvalue|` of `W_s` relative to `‖W_s‖`.
    pub singularity_at_s: f64,
    pub negatives_at_s: usize,
}

fn negatives(w: &DMatrix<f64>) -> Result<(usize, f64, f64)> {
    let eig = dense_eig(w)?;
    let norm = eig.norm();
    let neg = eig.eigenvalues.iter().filter(|&&e| e < -SIGN_TOL * norm).count();
    let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
    Ok((neg, smallest, norm))
}

/// Checks the inertia of `W_t` on `grid_points` uniform values of `t ∈ [0, 1]`:
/// one negative eigenvalue up to `s`, singular at `s`, two or more beyond `s`
/// plus one grid step.
pub fn verify_spectrum_path(inst: &TrsInstance, grid_points: usize) -> Result<SpectrumReport> {
    if grid_points < 2 {
        return Err(TrsError::InvalidInput("need at least two grid points".into()));
    }
    let eig = dense_eig_capped(&inst.q.to_dense(), DEFAULT_DENSE_CAP)?;
    let lambda_q = eig.min();
    let s = compute_s(lambda_q)?;
    let step = 1.0 / (grid_points - 1) as f64;
    let mut counts = Vec::with_capacity(grid_points);
    for k in 0..grid_points {
        let t = k as f64 * step;
        let (neg, _, _) = negatives(&build_wt(inst, t)?)?;
        counts.push((t, neg));
        let ok = if t <= s {
            neg == 1
        } else if t > s + step {
            neg >= 2
        } else {
            true
        };
        if !ok {
            return Err(TrsError::SpectrumPropertyViolated { t, negatives: neg });
        }
    }
    let (negatives_at_s, smallest, norm) = negatives(&build_wt(inst, s)?)?;
    let singularity_at_s = smallest / norm.max(f64::MIN_POSITIVE);
    if negatives_at_s != 1 || singularity_at_s > SINGULAR_TOL {
        return Err(TrsError::SpectrumPropertyViolated {
            t: s,
            negatives: negatives_at_s,
        });
    }
    Ok(SpectrumReport {
        lambda_q,
        s,
        counts,
        singularity_at_s,
        negatives_at_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HullMembership {
    pub member: bool,
    /// False when no `λ_Q`-eigenvector lies in `Null(A)`: the description is
    /// then only an outer approximation of `conv(X)`.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HullWitness {
    InX,
    /// `p = w_δ x^δ + w_ε x^ε` with both endpoints in `X` on the unit sphere.
    Combination {
        x_delta: EpigraphPoint,
        x_eps: EpigraphPoint,
        weights: (f64, f64),
    },
}

/// Dense data shared by the hull queries on one instance.
#[derive(Debug, Clone)]
pub struct HullModel<'a> {
    inst: &'a TrsInstance,
    pub lambda_q: f64,
    /// Unit `λ_Q`-eigenvector in `Null(A)`, when one exists.
    pub direction: Option<DVector<f64>>,
    pub scale: f64,
    pub caveat: Option<String>,
}

impl<'a> HullModel<'a> {
    pub fn new(inst: &'a TrsInstance) -> Result<Self> {
        let eig = dense_eig_capped(&inst.q.to_dense(), DEFAULT_DENSE_CAP)?;
        let lambda_q = eig.min();
        compute_s(lambda_q)?;
        let report = check_condition_convexify(inst)?;
        let (direction, caveat) = match report.status {
            ConditionStatus::Satisfied { witness } => (witness, None),
            ConditionStatus::Violated => (None, Some("no λ_Q-eigenvector in Null(A); outer approximation".into())),
            ConditionStatus::Inconclusive(why) => (None, Some(why)),
        };
        Ok(Self {
            inst,
            lambda_q,
            direction,
            scale: (eig.norm() + inst.g.norm()).max(1.0),
            caveat,
        })
    }

    pub fn is_exact(&self) -> bool {
        self.direction.is_some()
    }

    /// `f(y) = yᵀ(Q - λ_Q I)y + 2gᵀy + λ_Q`.
    pub fn f(&self, y: &DVector<f64>) -> f64 {
        self.inst.h(y) + self.lambda_q * (1.0 - y.norm_squared())
    }

    fn check_dim(&self, p: &EpigraphPoint) -> Result<()> {
        if p.y.len() != self.inst.dim() {
            return Err(TrsError::DimensionMismatch("epigraph point".into()));
        }
        Ok(())
    }

    fn in_x(&self, p: &EpigraphPoint) -> bool {
        let tol = MEMBERSHIP_TOL * self.scale;
        self.cone_and_ball(&p.y) && self.inst.h(&p.y) <= p.x_last + tol
    }

    fn cone_and_ball(&self, y: &DVector<f64>) -> bool {
        let tol = MEMBERSHIP_TOL * self.scale;
        y.norm() <= 1.0 + MEMBERSHIP_TOL && self.inst.constraints.as_ref().is_none_or(|c| c.violation(y) <= tol)
    }

    /// The SOC-representable inequality `f(y) ≤ x_last` on its own.
    pub fn in_fs(&self, p: &EpigraphPoint) -> Result<bool> {
        self.check_dim(p)?;
        Ok(self.f(&p.y) <= p.x_last + MEMBERSHIP_TOL * self.scale)
    }

    pub fn in_conv_x(&self, p: &EpigraphPoint) -> Result<HullMembership> {
        let fs = self.in_fs(p)?;
        Ok(HullMembership {
            member: fs && self.cone_and_ball(&p.y),
            exact: self.is_exact(),
        })
    }

    /// Writes a hull member as a combination of two points of `X` obtained by
    /// moving along the eigenvector direction to the sphere.
    pub fn hull_witness(&self, p: &EpigraphPoint) -> Result<HullWitness> {
        self.check_dim(p)?;
        if self.in_x(p) {
            return Ok(HullWitness::InX);
        }
        let Some(d) = &self.direction else {
            return Err(TrsError::WitnessUnavailable(
                self.caveat.clone().unwrap_or_else(|| "no direction".into()),
            ));
        };
        if !self.in_conv_x(p)?.member {
            return Err(TrsError::WitnessUnavailable("point is outside the hull".into()));
        }
        let ny2 = p.y.norm_squared();
        let slack = 1.0 - ny2;
        if !(slack > 0.0) {
            return Err(TrsError::WitnessUnavailable("boundary point outside X".into()));
        }
        // Roots η = ε and η = -δ of η² + 2(yᵀd)η - (1 - ‖y‖²) = 0.
        let pd = p.y.dot(d);
        let root = (pd * pd + slack).sqrt();
        let (delta, eps) = if pd > 0.0 {
            (pd + root, slack / (pd + root))
        } else {
            (slack / (root - pd), root - pd)
        };
        let gd = self.inst.g.dot(d);
        let x_delta = EpigraphPoint::new(&p.y - d * delta, p.x_last - 2.0 * gd * delta);
        let x_eps = EpigraphPoint::new(&p.y + d * eps, p.x_last + 2.0 * gd * eps);
        let weights = (eps / (delta + eps), delta / (delta + eps));
        for end in [&x_delta, &x_eps] {
            if !self.in_x(end) {
                return Err(TrsError::WitnessUnavailable("endpoint fails the X test".into()));
            }
        }
        Ok(HullWitness::Combination {
            x_delta,
            x_eps,
            weights,
        })
    }
}

/// False certifies that a point of `X` is not extreme in `conv(X)`; true
/// only marks a candidate.
pub fn extreme_point_filter(p: &EpigraphPoint) -> bool {
    p.y.norm() >= 1.0 - MEMBERSHIP_TOL
}
