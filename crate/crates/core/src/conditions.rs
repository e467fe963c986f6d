//! Checkers for the structural conditions behind the tightness and hull
//! results.
//!
//! - relaxation: some `d ≠ 0` with `Qd = λ_Q d`, `Ad ≥ 0`, `gᵀd ≤ 0`.
//! - dimensionality: `dim Null(Q - λ_Q I) ≥ rank(A) + 1`.
//! - convexify: some `λ_Q`-eigenvector `d` with `Ad = 0`.
//! - hollow containment: every removed ellipsoid lies strictly inside the
//!   ball and inside `{ Ay ≥ b }`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrsError};
use crate::instance::{Ellipsoid, HollowSpec, TrsInstance};
use crate::linalg::dense::{forward_substitute, right_singular_pairs};
use crate::linalg::{dense_eig_capped, lp_feasible, BoxBounds, LinearSystem, LpOutcome, SymSparseMatrix, DEFAULT_DENSE_CAP};
use crate::oracle::secular_solve;
use crate::solver::{solve, SolveSettings};

/// Relative width of the minimum-eigenvalue cluster.
pub const NULL_TOL: f64 = 1e-9;
/// Relative singular-value threshold for ranks and kernels.
pub const RANK_TOL: f64 = 1e-9;
/// Box bound on the null-space coordinates in the LP tests.
pub const LP_BOX: f64 = 1e3;
/// Smallest accepted margin `1 - max ‖y‖²` over a removed ellipsoid.
pub const HOLLOW_TOL: f64 = 1e-8;
/// Tolerance used when re-checking a witness direction.
pub const WITNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionId {
    Relaxation,
    Dimensionality,
    Convexify,
    HollowContainment,
}

impl ConditionId {
    pub fn name(self) -> &'static str {
        match self {
            ConditionId::Relaxation => "relaxation",
            ConditionId::Dimensionality => "dimensionality",
            ConditionId::Convexify => "convexify",
            ConditionId::HollowContainment => "hollow_containment",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionStatus {
    Satisfied { witness: Option<DVector<f64>> },
    Violated,
    Inconclusive(String),
}

impl ConditionStatus {
    pub fn name(&self) -> &'static str {
        match self {
            ConditionStatus::Satisfied { .. } => "satisfied",
            ConditionStatus::Violated => "violated",
            ConditionStatus::Inconclusive(_) => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub id: ConditionId,
    pub status: ConditionStatus,
    /// Main numerical threshold of the check.
    pub tolerance: f64,
    pub details: Vec<String>,
}

impl ConditionReport {
    fn new(id: ConditionId, status: ConditionStatus, tolerance: f64) -> Self {
        Self {
            id,
            status,
            tolerance,
            details: Vec::new(),
        }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.details.push(s.into());
        self
    }

    pub fn is_satisfied(&self) -> bool {
        matches!(self.status, ConditionStatus::Satisfied { .. })
    }

    pub fn witness(&self) -> Option<&DVector<f64>> {
        match &self.status {
            ConditionStatus::Satisfied { witness } => witness.as_ref(),
            _ => None,
        }
    }
}

/// Minimum eigenvalue of `Q` with an orthonormal basis of its eigenspace.
#[derive(Debug, Clone)]
pub struct MinEigenspace {
    pub lambda: f64,
    pub basis: DMatrix<f64>,
    /// `‖Q‖₂`.
    pub norm: f64,
    /// Another eigenvalue sits just outside the cluster threshold.
    pub ambiguous: bool,
}

impl MinEigenspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

pub fn min_eigenspace(q: &SymSparseMatrix, cap: usize) -> Result<MinEigenspace> {
    let eig = dense_eig_capped(&q.to_dense(), cap)?;
    let n = eig.eigenvalues.len();
    if n == 0 {
        return Err(TrsError::InvalidInput("empty matrix".into()));
    }
    let lambda = eig.min();
    let norm = eig.norm();
    let thresh = NULL_TOL * norm.max(f64::MIN_POSITIVE);
    let members: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] - lambda <= thresh).collect();
    let ambiguous = (0..n).any(|i| {
        let gap = eig.eigenvalues[i] - lambda;
        gap > thresh && gap <= 10.0 * thresh
    });
    let mut basis = DMatrix::zeros(n, members.len());
    for (j, &i) in members.iter().enumerate() {
        basis.set_column(j, &eig.eigenvectors.column(i));
    }
    Ok(MinEigenspace {
        lambda,
        basis,
        norm,
        ambiguous,
    })
}

fn nonconvex_space(inst: &TrsInstance) -> Result<MinEigenspace> {
    let space = min_eigenspace(&inst.q, DEFAULT_DENSE_CAP)?;
    if space.lambda >= 0.0 {
        return Err(TrsError::NotNonconvex(space.lambda));
    }
    Ok(space)
}

/// Unit vector along `d`, flipped so that `gᵀd ≤ 0`.
fn oriented(d: DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
    let d = &d / d.norm();
    if g.dot(&d) > 0.0 {
        -d
    } else {
        d
    }
}

fn cone_rows(system: LinearSystem, av: &DMatrix<f64>) -> LinearSystem {
    let mut sys = system;
    for i in 0..av.nrows() {
        let row: Vec<f64> = av.row(i).iter().copied().collect();
        sys = sys.geq(&row, 0.0);
    }
    sys
}

/// Existence of a `λ_Q`-eigenvector `d` with `Ad ≥ 0` and `gᵀd ≤ 0`.
///
/// With `V` a basis of the eigenspace the question is an LP in `w` (`d = Vw`):
/// first look for `AVw ≥ 0` with `gᵀVw ≤ -1`; failing that, for a nonzero
/// `w` with `gᵀVw = 0`, normalized by pinning one coordinate to `±1`.
pub fn check_condition_relaxation(inst: &TrsInstance) -> Result<ConditionReport> {
    let id = ConditionId::Relaxation;
    let space = nonconvex_space(inst)?;
    if space.ambiguous {
        return Ok(ConditionReport::new(
            id,
            ConditionStatus::Inconclusive("minimum eigenvalue cluster is ambiguous".into()),
            NULL_TOL,
        ));
    }
    let v = &space.basis;
    let k = v.ncols();
    let Some(cons) = inst.constraints.as_ref().filter(|c| c.rows() > 0) else {
        let d = oriented(v.column(0).into_owned(), &inst.g);
        return Ok(ConditionReport::new(id, ConditionStatus::Satisfied { witness: Some(d) }, NULL_TOL)
            .note("no side constraints"));
    };
    let av = &cons.a * v;
    let c: Vec<f64> = (v.transpose() * &inst.g).iter().copied().collect();

    let step1 = cone_rows(LinearSystem::new(BoxBounds::uniform(k, LP_BOX)), &av).leq(&c, -1.0);
    if let LpOutcome::Feasible(w) = lp_feasible(&step1)? {
        let d = oriented(v * w, &inst.g);
        return Ok(ConditionReport::new(id, ConditionStatus::Satisfied { witness: Some(d) }, NULL_TOL)
            .note("strict descent direction"));
    }
    for i in 0..k {
        for s in [1.0, -1.0] {
            let mut pin = vec![0.0; k];
            pin[i] = s;
            let sys = cone_rows(LinearSystem::new(BoxBounds::uniform(k, LP_BOX)), &av)
                .eq(&c, 0.0)
                .eq(&pin, 1.0);
            if let LpOutcome::Feasible(w) = lp_feasible(&sys)? {
                let d = v * w;
                let d = &d / d.norm();
                return Ok(
                    ConditionReport::new(id, ConditionStatus::Satisfied { witness: Some(d) }, NULL_TOL)
                        .note("direction orthogonal to g"),
                );
            }
        }
    }
    Ok(ConditionReport::new(id, ConditionStatus::Violated, NULL_TOL))
}

/// Smallest singular direction of `A V`, when it is numerically a kernel vector.
enum KernelProbe {
    Kernel(DVector<f64>),
    None,
    Borderline(f64),
}

fn probe_kernel(av: &DMatrix<f64>, a_norm: f64) -> Result<KernelProbe> {
    let (sv, vecs) = right_singular_pairs(av)?;
    if sv.is_empty() {
        return Ok(KernelProbe::None);
    }
    let thresh = RANK_TOL * a_norm.max(f64::MIN_POSITIVE);
    if sv[0] <= thresh {
        Ok(KernelProbe::Kernel(vecs.column(0).into_owned()))
    } else if sv[0] <= 10.0 * thresh {
        Ok(KernelProbe::Borderline(sv[0]))
    } else {
        Ok(KernelProbe::None)
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let (sv, _) = right_singular_pairs(m)?;
    Ok(sv.iter().fold(0.0_f64, |a, s| a.max(*s)))
}

/// `dim Null(Q - λ_Q I) ≥ rank(A) + 1`.
pub fn check_condition_dimensionality(inst: &TrsInstance) -> Result<ConditionReport> {
    let id = ConditionId::Dimensionality;
    let space = nonconvex_space(inst)?;
    let k = space.dim();
    let v = &space.basis;
    let Some(cons) = inst.constraints.as_ref().filter(|c| c.rows() > 0) else {
        let d = oriented(v.column(0).into_owned(), &inst.g);
        return Ok(ConditionReport::new(id, ConditionStatus::Satisfied { witness: Some(d) }, RANK_TOL)
            .note("no side constraints"));
    };
    if space.ambiguous {
        return Ok(ConditionReport::new(
            id,
            ConditionStatus::Inconclusive("minimum eigenvalue cluster is ambiguous".into()),
            RANK_TOL,
        ));
    }
    let (sv, _) = right_singular_pairs(&cons.a.transpose())?;
    let smax = sv.iter().fold(0.0_f64, |a, s| a.max(*s));
    let thresh = RANK_TOL * smax;
    if sv.iter().any(|&s| s > thresh && s <= 10.0 * thresh) {
        return Ok(ConditionReport::new(
            id,
            ConditionStatus::Inconclusive("rank of A is borderline".into()),
            RANK_TOL,
        ));
    }
    let rank = sv.iter().filter(|&&s| s > thresh && s > 0.0).count();
    let detail = format!("eigenspace dimension {k}, rank(A) = {rank}");
    if k < rank + 1 {
        return Ok(ConditionReport::new(id, ConditionStatus::Violated, RANK_TOL).note(detail));
    }
    let witness = match probe_kernel(&(&cons.a * v), smax)? {
        KernelProbe::Kernel(w) => Some(oriented(v * w, &inst.g)),
        _ => None,
    };
    Ok(ConditionReport::new(id, ConditionStatus::Satisfied { witness }, RANK_TOL).note(detail))
}

/// Some `λ_Q`-eigenvector lies in `Null(A)`.
pub fn check_condition_convexify(inst: &TrsInstance) -> Result<ConditionReport> {
    let id = ConditionId::Convexify;
    let space = nonconvex_space(inst)?;
    let v = &space.basis;
    let Some(cons) = inst.constraints.as_ref().filter(|c| c.rows() > 0) else {
        let d = oriented(v.column(0).into_owned(), &inst.g);
        return Ok(ConditionReport::new(id, ConditionStatus::Satisfied { witness: Some(d) }, RANK_TOL)
            .note("no side constraints"));
    };
    if space.ambiguous {
        return Ok(ConditionReport::new(
            id,
            ConditionStatus::Inconclusive("minimum eigenvalue cluster is ambiguous".into()),
            RANK_TOL,
        ));
    }
    let a_norm = spectral_norm(&cons.a)?;
    match probe_kernel(&(&cons.a * v), a_norm)? {
        KernelProbe::Kernel(w) => Ok(ConditionReport::new(
            id,
            ConditionStatus::Satisfied {
                witness: Some(oriented(v * w, &inst.g)),
            },
            RANK_TOL,
        )),
        KernelProbe::Borderline(s) => Ok(ConditionReport::new(
            id,
            ConditionStatus::Inconclusive(format!("smallest singular value of AV is {s:e}")),
            RANK_TOL,
        )),
        KernelProbe::None => Ok(ConditionReport::new(id, ConditionStatus::Violated, RANK_TOL)),
    }
}

/// Geometry of an ellipsoid in centre/radius form:
/// `E = { y_c + r L⁻ᵀ z : ‖z‖ ≤ 1 }` with `W = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct EllipsoidGeometry {
    pub center: DVector<f64>,
    pub radius_sq: f64,
    /// `L⁻¹`.
    pub l_inv: DMatrix<f64>,
}

impl EllipsoidGeometry {
    pub fn of(e: &Ellipsoid) -> Self {
        let n = e.dim();
        let l = e.cholesky_factor();
        let mut l_inv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut unit = DVector::zeros(n);
            unit[j] = 1.0;
            l_inv.set_column(j, &forward_substitute(l, &unit));
        }
        Self {
            center: e.center(),
            radius_sq: e.radius_sq(),
            l_inv,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.radius_sq <= 0.0
    }

    /// `min { aᵀy : y ∈ E } = aᵀy_c - r ‖L⁻¹a‖`.
    pub fn min_linear(&self, a: &DVector<f64>) -> f64 {
        a.dot(&self.center) - self.radius_sq.max(0.0).sqrt() * (&self.l_inv * a).norm()
    }

    /// Classical problem whose optimum `o` gives `min { 1 - ‖y‖² : y ∈ E } = 1 - ‖y_c‖² + o`.
    pub fn margin_problem(&self) -> Result<TrsInstance> {
        let r = self.radius_sq.max(0.0).sqrt();
        let q = (&self.l_inv * self.l_inv.transpose()) * (-self.radius_sq);
        let q = (&q + q.transpose()) * 0.5;
        let g = (&self.l_inv * &self.center) * (-r);
        TrsInstance::classical(SymSparseMatrix::from_dense(&q)?, g)
    }
}

/// `min { 1 - ‖y‖² : y ∈ E }`, or `None` for an empty ellipsoid.
///
/// Solved with the library pipeline and cross-checked against the dense
/// oracle; a disagreement beyond `1e-6` (scaled) is an error.
pub fn ellipsoid_margin(e: &Ellipsoid, settings: &SolveSettings) -> Result<Option<f64>> {
    let geo = EllipsoidGeometry::of(e);
    if geo.is_empty() {
        return Ok(None);
    }
    let base = 1.0 - geo.center.norm_squared();
    let sub = geo.margin_problem()?;
    let sol = solve(&sub, settings)?;
    if sub.dim() <= settings.dense_cap {
        let exact = secular_solve(&sub.q.to_dense(), &sub.g)?;
        if (exact.value - sol.h_value).abs() > 1e-6 * sol.scale {
            return Err(TrsError::ConvergenceFailure(format!(
                "ellipsoid margin: pipeline {} vs oracle {}",
                sol.h_value, exact.value
            )));
        }
        return Ok(Some(base + exact.value.min(sol.h_value)));
    }
    Ok(Some(base + sol.h_value))
}

/// The removed region lies strictly inside the ball and inside `{ Ay ≥ b }`.
pub fn check_hollow_containment(inst: &TrsInstance, settings: &SolveSettings) -> Result<ConditionReport> {
    let id = ConditionId::HollowContainment;
    let rows: Vec<(DVector<f64>, f64)> = inst
        .constraints
        .as_ref()
        .map(|c| (0..c.rows()).map(|j| (c.a.row(j).transpose(), c.b[j])).collect())
        .unwrap_or_default();
    match &inst.hollow {
        HollowSpec::None => Ok(ConditionReport::new(id, ConditionStatus::Satisfied { witness: None }, HOLLOW_TOL)
            .note("no hollow")),
        HollowSpec::NormLowerBound(l) => {
            if !(0.0..=1.0).contains(l) {
                return Ok(ConditionReport::new(id, ConditionStatus::Violated, HOLLOW_TOL)
                    .note(format!("l = {l} outside [0, 1]")));
            }
            let mut report = ConditionReport::new(id, ConditionStatus::Satisfied { witness: None }, HOLLOW_TOL);
            for (j, (a, b)) in rows.iter().enumerate() {
                let lowest = -l * a.norm();
                if lowest < *b - 1e-12 {
                    report.status = ConditionStatus::Violated;
                    report = report.note(format!("row {j}: min over the inner ball {lowest} < {b}"));
                }
            }
            Ok(report)
        }
        HollowSpec::EllipsoidUnion(list) => {
            let mut report = ConditionReport::new(id, ConditionStatus::Satisfied { witness: None }, HOLLOW_TOL);
            for (i, e) in list.iter().enumerate() {
                let geo = EllipsoidGeometry::of(e);
                if geo.is_empty() {
                    report = report.note(format!("ellipsoid {i} is empty"));
                    continue;
                }
                let v = ellipsoid_margin(e, settings)?.unwrap_or(f64::INFINITY);
                report = report.note(format!("ellipsoid {i}: margin {v}"));
                if !(v > HOLLOW_TOL) {
                    report.status = ConditionStatus::Violated;
                }
                for (j, (a, b)) in rows.iter().enumerate() {
                    let lowest = geo.min_linear(a);
                    if lowest < *b - 1e-12 {
                        report.status = ConditionStatus::Violated;
                        report = report.note(format!("ellipsoid {i}, row {j}: min {lowest} < {b}"));
                    }
                }
            }
            Ok(report)
        }
    }
}

/// Re-checks the defining relations of a witness direction.
pub fn verify_witness(inst: &TrsInstance, d: &DVector<f64>, id: ConditionId) -> bool {
    if d.len() != inst.dim() {
        return false;
    }
    let nd = d.norm();
    if !(nd > 0.0) {
        return false;
    }
    let Ok(space) = min_eigenspace(&inst.q, DEFAULT_DENSE_CAP) else {
        return false;
    };
    let u = d / nd;
    let residual = (inst.q.apply(&u) - &u * space.lambda).norm();
    if residual > WITNESS_TOL * space.norm.max(1.0) {
        return false;
    }
    let a_scale = inst
        .constraints
        .as_ref()
        .map_or(1.0, |c| c.a.iter().fold(1.0_f64, |m, v| m.max(v.abs())));
    let au = inst.constraints.as_ref().map(|c| &c.a * &u);
    match id {
        ConditionId::Relaxation | ConditionId::Dimensionality => {
            let cone_ok = au.is_none_or(|v| v.iter().all(|x| *x >= -WITNESS_TOL * a_scale));
            cone_ok && inst.g.dot(&u) <= WITNESS_TOL * inst.g.norm().max(1.0)
        }
        ConditionId::Convexify => au.is_none_or(|v| v.iter().all(|x| x.abs() <= WITNESS_TOL * a_scale)),
        ConditionId::HollowContainment => false,
    }
}
