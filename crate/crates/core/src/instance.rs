use std::fmt;
use std::time::Duration;

use nalgebra::{DMatrix, DVector};

use crate::eigen::{min_eigenvalue, EigenEstimate};
use crate::error::{Result, TrsError};
use crate::linalg::dense::{backward_substitute_transposed, cholesky, dense_eig, forward_substitute};
use crate::linalg::{SymSparseMatrix, DEFAULT_DENSE_CAP};

/// Side constraints `A y - b ≥ 0` (componentwise, i.e. the nonnegative orthant).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraintBlock {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LinearConstraintBlock {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(TrsError::DimensionMismatch(format!(
                "A has {} rows but b has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(TrsError::InvalidInput("non-finite constraint data".into()));
        }
        Ok(Self { a, b })
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// `A y - b`; feasible when every entry is nonnegative.
    pub fn slack(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.a * y - &self.b
    }

    /// Largest amount by which any row is violated (zero when feasible).
    pub fn violation(&self, y: &DVector<f64>) -> f64 {
        self.slack(y).iter().fold(0.0_f64, |w, s| w.max(-s))
    }
}

/// `{ y : yᵀ W y + 2 bᵀ y + c ≤ 0 }` with `W` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    w: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
    chol: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(w: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        if w.nrows() != w.ncols() || w.nrows() != b.len() {
            return Err(TrsError::DimensionMismatch(format!(
                "ellipsoid W is {}x{} with b of length {}",
                w.nrows(),
                w.ncols(),
                b.len()
            )));
        }
        if !c.is_finite() || w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(TrsError::InvalidInput("non-finite ellipsoid data".into()));
        }
        let chol = cholesky(&w)?;
        Ok(Self { w, b, c, chol })
    }

    /// Euclidean ball of the given radius around `center`.
    pub fn ball(center: &DVector<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        Self::new(
            DMatrix::identity(n, n),
            -center.clone(),
            center.norm_squared() - radius * radius,
        )
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Lower Cholesky factor of `W`.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// `yᵀ W y + 2 bᵀ y + c`; nonpositive inside the ellipsoid.
    pub fn value(&self, y: &DVector<f64>) -> f64 {
        (&self.w * y).dot(y) + 2.0 * self.b.dot(y) + self.c
    }

    /// Centre `-W⁻¹ b`.
    pub fn center(&self) -> DVector<f64> {
        -self.solve_w(&self.b)
    }

    /// Squared radius `bᵀ W⁻¹ b - c` in the metric of `W`.
    pub fn radius_sq(&self) -> f64 {
        self.b.dot(&self.solve_w(&self.b)) - self.c
    }

    fn solve_w(&self, v: &DVector<f64>) -> DVector<f64> {
        let t = forward_substitute(&self.chol, v);
        backward_substitute_transposed(&self.chol, &t)
    }
}

/// Region removed from the ball.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum HollowSpec {
    #[default]
    None,
    /// Keep only `‖y‖ ≥ l`.
    NormLowerBound(f64),
    /// Remove the union of the listed ellipsoids.
    EllipsoidUnion(Vec<Ellipsoid>),
}

impl HollowSpec {
    /// True when `y` lies outside the removed region.
    pub fn admits(&self, y: &DVector<f64>) -> bool {
        match self {
            HollowSpec::None => true,
            HollowSpec::NormLowerBound(l) => y.norm() >= *l,
            HollowSpec::EllipsoidUnion(list) => list.iter().all(|e| e.value(y) >= 0.0),
        }
    }
}

/// `min yᵀQy + 2gᵀy` over `‖y‖ ≤ 1`, optional side constraints and an
/// optional hollow.
#[derive(Debug, Clone, PartialEq)]
pub struct TrsInstance {
    pub q: SymSparseMatrix,
    pub g: DVector<f64>,
    pub constraints: Option<LinearConstraintBlock>,
    pub hollow: HollowSpec,
}

impl TrsInstance {
    pub fn new(
        q: SymSparseMatrix,
        g: DVector<f64>,
        constraints: Option<LinearConstraintBlock>,
        hollow: HollowSpec,
    ) -> Result<Self> {
        let n = q.dim();
        if g.len() != n {
            return Err(TrsError::DimensionMismatch(format!(
                "g has length {} but Q is {n}x{n}",
                g.len()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(TrsError::InvalidInput("non-finite entry in g".into()));
        }
        if let Some(c) = &constraints {
            if c.a.ncols() != n {
                return Err(TrsError::DimensionMismatch(format!(
                    "A has {} columns but n = {n}",
                    c.a.ncols()
                )));
            }
        }
        match &hollow {
            HollowSpec::NormLowerBound(l) if !l.is_finite() => {
                return Err(TrsError::InvalidInput("non-finite hollow bound".into()));
            }
            HollowSpec::EllipsoidUnion(list) => {
                if let Some(e) = list.iter().find(|e| e.dim() != n) {
                    return Err(TrsError::DimensionMismatch(format!(
                        "ellipsoid of dimension {} in an n = {n} instance",
                        e.dim()
                    )));
                }
            }
            _ => {}
        }
        Ok(Self {
            q,
            g,
            constraints,
            hollow,
        })
    }

    pub fn classical(q: SymSparseMatrix, g: DVector<f64>) -> Result<Self> {
        Self::new(q, g, None, HollowSpec::None)
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn has_constraints(&self) -> bool {
        self.constraints.as_ref().is_some_and(|c| c.rows() > 0)
    }

    /// `h(y) = yᵀQy + 2gᵀy`.
    pub fn h(&self, y: &DVector<f64>) -> f64 {
        self.q.quad_form(y) + 2.0 * self.g.dot(y)
    }

    /// Ball and side-constraint feasibility (the hollow is ignored).
    pub fn relaxed_feasible(&self, y: &DVector<f64>, tol: f64) -> bool {
        y.norm() <= 1.0 + tol
            && self
                .constraints
                .as_ref()
                .is_none_or(|c| c.violation(y) <= tol)
    }

    /// Full feasibility including the hollow.
    pub fn feasible(&self, y: &DVector<f64>, tol: f64) -> bool {
        self.relaxed_feasible(y, tol) && self.hollow.admits(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    NotNonconvex,
    HollowBoundOutOfRange,
    EmptyHollowList,
    EmptyConstraintBlock,
    ZeroConstraintRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Structural warnings about an instance. Never fails: problems computing
/// the spectrum are themselves reported as diagnostics.
pub fn validate(inst: &TrsInstance) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = inst.dim();
    let lambda = if n == 0 {
        None
    } else if n <= DEFAULT_DENSE_CAP {
        dense_eig(&inst.q.to_dense()).ok().map(|e| e.min())
    } else {
        min_eigenvalue(&inst.q, 1e-8, 1e-2, 0).ok().map(|e| e.lambda_hat)
    };
    match lambda {
        Some(l) if l >= 0.0 => out.push(Diagnostic {
            kind: DiagnosticKind::NotNonconvex,
            message: format!("λ_min(Q) ≥ 0: assumption λ_Q < 0 violated (λ_min = {l})"),
        }),
        None if n > 0 => out.push(Diagnostic {
            kind: DiagnosticKind::NotNonconvex,
            message: "λ_min(Q) could not be computed".into(),
        }),
        _ => {}
    }
    if let Some(c) = &inst.constraints {
        if c.rows() == 0 {
            out.push(Diagnostic {
                kind: DiagnosticKind::EmptyConstraintBlock,
                message: "constraint block has no rows".into(),
            });
        }
        for i in 0..c.rows() {
            if c.a.row(i).iter().all(|v| *v == 0.0) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::ZeroConstraintRow,
                    message: format!("constraint row {i} has A = 0"),
                });
            }
        }
    }
    match &inst.hollow {
        HollowSpec::NormLowerBound(l) if *l > 1.0 => out.push(Diagnostic {
            kind: DiagnosticKind::HollowBoundOutOfRange,
            message: format!("l = {l} > 1 violates interval-bounded hypothesis"),
        }),
        HollowSpec::NormLowerBound(l) if *l < 0.0 => out.push(Diagnostic {
            kind: DiagnosticKind::HollowBoundOutOfRange,
            message: format!("l = {l} < 0 violates interval-bounded hypothesis"),
        }),
        HollowSpec::EllipsoidUnion(list) if list.is_empty() => out.push(Diagnostic {
            kind: DiagnosticKind::EmptyHollowList,
            message: "hollow ellipsoid list is empty".into(),
        }),
        _ => {}
    }
    out
}

/// How the returned point was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// The surrogate minimizer already had unit norm.
    BoundaryOptimum,
    /// An interior surrogate minimizer was moved to the sphere along a
    /// minimum-eigenvalue direction.
    PushedAlongEigenvector,
    /// `λ_min(Q) ≥ 0`; the objective was minimized directly.
    ConvexCase,
    /// `g = 0` without side constraints: the eigenvector is optimal.
    EigenvectorShortcut,
    /// No tightness argument applied; the surrogate value is a lower bound.
    NotCertified,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Certificate::BoundaryOptimum => "boundary_optimum",
            Certificate::PushedAlongEigenvector => "pushed_along_eigenvector",
            Certificate::ConvexCase => "convex_case",
            Certificate::EigenvectorShortcut => "eigenvector_shortcut",
            Certificate::NotCertified => "not_certified",
        }
    }
}

/// Wall-clock time spent in each pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub eigen: Duration,
    pub reformulate: Duration,
    pub apg: Duration,
    pub certify: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrsSolution {
    pub y: DVector<f64>,
    pub h_value: f64,
    pub f_value: f64,
    pub norm_y: f64,
    pub tight: bool,
    pub certificate: Certificate,
    /// Accelerated-gradient iterations.
    pub iterations: usize,
    /// Certified upper bound on the surrogate optimality gap at the APG output.
    pub gap: f64,
    /// Shift used in the surrogate.
    pub gamma: f64,
    /// `max(1, ‖Q‖ + ‖g‖)`, used to scale tolerances.
    pub scale: f64,
    pub eigen_estimate: EigenEstimate,
    pub timings: StageTimings,
    pub diagnostics: Vec<String>,
}
