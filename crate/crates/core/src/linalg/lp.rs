//! Dense two-phase simplex for the small linear programs that arise when
//! checking structural conditions.
//!
//! Every variable carries finite box bounds, so phase I always terminates with
//! a bounded optimum and phase II can never be unbounded. Pivoting follows
//! Bland's smallest-index rule.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrsError};

/// Absolute feasibility tolerance on the phase-I optimum (scaled by the
/// largest right-hand side when that exceeds one).
pub const PHASE_ONE_TOL: f64 = 1e-9;
/// Largest constraint violation a returned witness may have.
pub const WITNESS_TOL: f64 = 1e-8;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

/// Finite lower and upper bounds on every variable.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl BoxBounds {
    pub fn uniform(n: usize, limit: f64) -> Self {
        Self {
            lower: DVector::from_element(n, -limit),
            upper: DVector::from_element(n, limit),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

/// Constraint system `A_ineq x ≤ b_ineq`, `A_eq x = b_eq`, `lower ≤ x ≤ upper`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a_ineq: DMatrix<f64>,
    pub b_ineq: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub bounds: BoxBounds,
}

impl LinearSystem {
    pub fn new(bounds: BoxBounds) -> Self {
        let n = bounds.dim();
        Self {
            a_ineq: DMatrix::zeros(0, n),
            b_ineq: DVector::zeros(0),
            a_eq: DMatrix::zeros(0, n),
            b_eq: DVector::zeros(0),
            bounds,
        }
    }

    /// Appends the row `a · x ≤ b`.
    pub fn leq(mut self, a: &[f64], b: f64) -> Self {
        let rows = self.a_ineq.nrows();
        self.a_ineq = self.a_ineq.insert_row(rows, 0.0);
        for (j, v) in a.iter().enumerate() {
            self.a_ineq[(rows, j)] = *v;
        }
        self.b_ineq = self.b_ineq.push(b);
        self
    }

    /// Appends the row `a · x ≥ b`.
    pub fn geq(self, a: &[f64], b: f64) -> Self {
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        self.leq(&neg, -b)
    }

    /// Appends the row `a · x = b`.
    pub fn eq(mut self, a: &[f64], b: f64) -> Self {
        let rows = self.a_eq.nrows();
        self.a_eq = self.a_eq.insert_row(rows, 0.0);
        for (j, v) in a.iter().enumerate() {
            self.a_eq[(rows, j)] = *v;
        }
        self.b_eq = self.b_eq.push(b);
        self
    }

    fn check_dims(&self) -> Result<()> {
        let n = self.bounds.dim();
        if self.bounds.upper.len() != n
            || self.a_ineq.ncols() != n
            || self.a_eq.ncols() != n
            || self.a_ineq.nrows() != self.b_ineq.len()
            || self.a_eq.nrows() != self.b_eq.len()
        {
            return Err(TrsError::DimensionMismatch("LP constraint blocks disagree".into()));
        }
        for j in 0..n {
            let (lo, hi) = (self.bounds.lower[j], self.bounds.upper[j]);
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(TrsError::InvalidInput(format!(
                    "variable {j} has bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint (including bounds) at `x`.
    pub fn violation(&self, x: &DVector<f64>) -> f64 {
        let mut worst = 0.0_f64;
        if self.a_ineq.nrows() > 0 {
            let r = &self.a_ineq * x - &self.b_ineq;
            worst = r.iter().fold(worst, |w, v| w.max(*v));
        }
        if self.a_eq.nrows() > 0 {
            let r = &self.a_eq * x - &self.b_eq;
            worst = r.iter().fold(worst, |w, v| w.max(v.abs()));
        }
        for j in 0..x.len() {
            worst = worst
                .max(self.bounds.lower[j] - x[j])
                .max(x[j] - self.bounds.upper[j]);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Feasible(DVector<f64>),
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { x: DVector<f64>, value: f64 },
    Infeasible,
}

/// Phase I only: returns a feasible point or reports infeasibility.
pub fn lp_feasible(system: &LinearSystem) -> Result<LpOutcome> {
    system.check_dims()?;
    let mut tab = Tableau::build(system);
    tab.run()?;
    if tab.objective_value() > tab.feas_tol {
        return Ok(LpOutcome::Infeasible);
    }
    let x = tab.primal(system);
    let viol = system.violation(&x);
    if viol > WITNESS_TOL {
        return Err(TrsError::LpNumericalFailure(viol));
    }
    Ok(LpOutcome::Feasible(x))
}

/// Minimizes `cost · x` over the system.
pub fn lp_minimize(system: &LinearSystem, cost: &DVector<f64>) -> Result<LpSolution> {
    system.check_dims()?;
    if cost.len() != system.bounds.dim() {
        return Err(TrsError::DimensionMismatch("LP cost vector".into()));
    }
    let mut tab = Tableau::build(system);
    tab.run()?;
    if tab.objective_value() > tab.feas_tol {
        return Ok(LpSolution::Infeasible);
    }
    tab.start_phase_two(cost);
    tab.run()?;
    let x = tab.primal(system);
    let viol = system.violation(&x);
    if viol > WITNESS_TOL {
        return Err(TrsError::LpNumericalFailure(viol));
    }
    Ok(LpSolution::Optimal {
        value: cost.dot(&x),
        x,
    })
}

/// Standard-form tableau over `u = x - lower ≥ 0`, one slack per inequality
/// row, one slack per upper bound, and one artificial per row.
struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    t: DMatrix<f64>,
    /// Reduced costs (length `cols`) followed by the negated objective value.
    obj: DVector<f64>,
    basis: Vec<usize>,
    n_vars: usize,
    n_real: usize,
    allow_artificial: bool,
    feas_tol: f64,
}

impl Tableau {
    fn build(sys: &LinearSystem) -> Self {
        let n = sys.bounds.dim();
        let m1 = sys.a_ineq.nrows();
        let m2 = sys.a_eq.nrows();
        let rows = m1 + n + m2;
        let n_real = n + m1 + n;
        let cols = n_real + rows;
        let mut t = DMatrix::zeros(rows, cols + 1);
        let lo = &sys.bounds.lower;

        for i in 0..m1 {
            let mut rhs = sys.b_ineq[i];
            for j in 0..n {
                t[(i, j)] = sys.a_ineq[(i, j)];
                rhs -= sys.a_ineq[(i, j)] * lo[j];
            }
            t[(i, n + i)] = 1.0;
            t[(i, cols)] = rhs;
        }
        for j in 0..n {
            let r = m1 + j;
            t[(r, j)] = 1.0;
            t[(r, n + m1 + j)] = 1.0;
            t[(r, cols)] = sys.bounds.upper[j] - lo[j];
        }
        for i in 0..m2 {
            let r = m1 + n + i;
            let mut rhs = sys.b_eq[i];
            for j in 0..n {
                t[(r, j)] = sys.a_eq[(i, j)];
                rhs -= sys.a_eq[(i, j)] * lo[j];
            }
            t[(r, cols)] = rhs;
        }
        let mut max_rhs = 1.0_f64;
        for r in 0..rows {
            if t[(r, cols)] < 0.0 {
                for c in 0..=cols {
                    t[(r, c)] = -t[(r, c)];
                }
            }
            max_rhs = max_rhs.max(t[(r, cols)].abs());
            t[(r, n_real + r)] = 1.0;
        }
        let mut obj = DVector::zeros(cols + 1);
        for r in 0..rows {
            for c in 0..n_real {
                obj[c] -= t[(r, c)];
            }
            obj[cols] -= t[(r, cols)];
        }
        Self {
            t,
            obj,
            basis: (n_real..n_real + rows).collect(),
            n_vars: n,
            n_real,
            allow_artificial: true,
            feas_tol: PHASE_ONE_TOL * max_rhs,
        }
    }

    fn cols(&self) -> usize {
        self.t.ncols() - 1
    }

    fn objective_value(&self) -> f64 {
        -self.obj[self.cols()]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let cols = self.cols();
        let p = self.t[(row, col)];
        for c in 0..=cols {
            self.t[(row, c)] /= p;
        }
        for r in 0..self.t.nrows() {
            if r != row {
                let f = self.t[(r, col)];
                if f != 0.0 {
                    for c in 0..=cols {
                        let v = self.t[(row, c)];
                        self.t[(r, c)] -= f * v;
                    }
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for c in 0..=cols {
                self.obj[c] -= f * self.t[(row, c)];
            }
        }
        self.basis[row] = col;
    }

    fn run(&mut self) -> Result<()> {
        let limit = if self.allow_artificial {
            self.cols()
        } else {
            self.n_real
        };
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..limit).find(|&c| self.obj[c] < -COST_TOL) else {
                return Ok(());
            };
            let cols = self.cols();
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.t.nrows() {
                let a = self.t[(r, enter)];
                if a > PIVOT_TOL {
                    let ratio = self.t[(r, cols)].max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-14
                                || (ratio <= bratio + 1e-14 && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                // Cannot happen with finite boxes; treat as converged.
                None => return Ok(()),
            }
        }
        Err(TrsError::CycleGuardTripped(MAX_PIVOTS))
    }

    fn start_phase_two(&mut self, cost: &DVector<f64>) {
        let n_real = self.n_real;
        for r in 0..self.t.nrows() {
            if self.basis[r] >= n_real {
                if let Some(c) = (0..n_real).find(|&c| self.t[(r, c)].abs() > 1e-9) {
                    self.pivot(r, c);
                }
            }
        }
        let cols = self.cols();
        let mut full_cost = DVector::zeros(cols);
        for j in 0..self.n_vars {
            full_cost[j] = cost[j];
        }
        self.obj = DVector::zeros(cols + 1);
        for c in 0..cols {
            self.obj[c] = full_cost[c];
        }
        for r in 0..self.t.nrows() {
            let cb = full_cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..=cols {
                    self.obj[c] -= cb * self.t[(r, c)];
                }
            }
        }
        self.allow_artificial = false;
    }

    fn primal(&self, sys: &LinearSystem) -> DVector<f64> {
        let cols = self.cols();
        let mut x = sys.bounds.lower.clone();
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_vars {
                x[b] += self.t[(r, cols)];
            }
        }
        x
    }
}
