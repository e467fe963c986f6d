//! Reference solvers used to validate the main pipeline.
//!
//! [`secular_solve`] handles the classical problem exactly through a full
//! eigendecomposition. [`grid_minimize`] brute-forces tiny instances of any
//! variant, including hollow ones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrsError};
use crate::instance::{HollowSpec, TrsInstance};
use crate::linalg::dense_eig;

/// First-order optimality data of a classical solution.
#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    pub mu: f64,
    /// `‖(Q + μI) y + g‖`.
    pub stationarity: f64,
    /// `μ |1 - ‖y‖²|`.
    pub complementarity: f64,
    /// `λ_min(Q) + μ`, nonnegative at a global minimizer.
    pub dual_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecularSolution {
    pub y: DVector<f64>,
    pub value: f64,
    pub hard_case: bool,
    pub kkt: KktCertificate,
}

/// Exact minimizer of `yᵀQy + 2gᵀy` over `‖y‖ ≤ 1`.
///
/// Solves `‖(Q + μI)⁻¹ g‖ = 1` for `μ ≥ max(0, -λ_min)` by safeguarded Newton
/// on `1/‖y(μ)‖ - 1`, with the usual hard-case completion along the minimum
/// eigenvector when `g` is orthogonal to that eigenspace.
pub fn secular_solve(q: &DMatrix<f64>, g: &DVector<f64>) -> Result<SecularSolution> {
    let n = g.len();
    if q.nrows() != n || q.ncols() != n {
        return Err(TrsError::DimensionMismatch("Q and g disagree".into()));
    }
    let eig = dense_eig(q)?;
    let lam = &eig.eigenvalues;
    let u = &eig.eigenvectors;
    let c = u.transpose() * g;
    let scale = eig.norm().max(g.norm()).max(1.0);
    let q1 = lam[0];
    let cluster = 1e-10 * scale;
    let in_j = |i: usize| lam[i] - q1 <= cluster;

    let phi = |mu: f64, skip_j: bool| -> f64 {
        (0..n)
            .filter(|&i| !(skip_j && in_j(i)))
            .map(|i| (c[i] / (lam[i] + mu)).powi(2))
            .sum()
    };
    let y_of = |mu: f64, skip_j: bool| -> DVector<f64> {
        let mut y = DVector::zeros(n);
        for i in 0..n {
            if skip_j && in_j(i) {
                continue;
            }
            y -= u.column(i) * (c[i] / (lam[i] + mu));
        }
        y
    };

    let mu_lo = (-q1).max(0.0);
    let mut hard_case = false;
    let (y, mu) = if q1 > cluster && phi(0.0, false) <= 1.0 {
        (y_of(0.0, false), 0.0)
    } else {
        let cj: f64 = (0..n).filter(|&i| in_j(i)).map(|i| c[i] * c[i]).sum();
        let excl = if mu_lo + q1 <= cluster { phi(mu_lo, true) } else { f64::INFINITY };
        if cj.sqrt() <= 1e-12 * scale && excl <= 1.0 {
            hard_case = true;
            let mut y = y_of(mu_lo, true);
            let tau = (1.0 - y.norm_squared()).max(0.0).sqrt();
            y += u.column(0) * tau;
            (y, mu_lo)
        } else {
            let mu = secular_root(|m| phi(m, false), &lam, &c, mu_lo, (g.norm() - q1).max(mu_lo) + 1.0);
            (y_of(mu, false), mu)
        }
    };

    let value = (q * &y).dot(&y) + 2.0 * g.dot(&y);
    let kkt = KktCertificate {
        mu,
        stationarity: (q * &y + &y * mu + g).norm(),
        complementarity: mu * (1.0 - y.norm_squared()).abs(),
        dual_margin: q1 + mu,
    };
    Ok(SecularSolution {
        y,
        value,
        hard_case,
        kkt,
    })
}

fn secular_root(
    phi: impl Fn(f64) -> f64,
    lam: &DVector<f64>,
    c: &DVector<f64>,
    lo: f64,
    hi: f64,
) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut mu = hi;
    for _ in 0..200 {
        let p = phi(mu);
        let val = 1.0 / p.sqrt() - 1.0;
        if val.abs() <= 1e-15 {
            break;
        }
        if val < 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let dphi: f64 = -2.0 * (0..lam.len()).map(|i| c[i] * c[i] / (lam[i] + mu).powi(3)).sum::<f64>();
        let dpsi = -0.5 * p.powf(-1.5) * dphi;
        let newton = mu - val / dpsi;
        mu = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-16 * hi.abs().max(1.0) {
            break;
        }
    }
    if phi(mu).is_finite() {
        mu
    } else {
        hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub y: DVector<f64>,
    pub value: f64,
    pub evaluated: usize,
}

const GRID_FEAS_TOL: f64 = 1e-12;
const REFINE_SEEDS: usize = 8;
const REFINE_FLOOR: f64 = 1e-7;

struct GridSearch<'a> {
    inst: &'a TrsInstance,
    evaluated: usize,
}

impl GridSearch<'_> {
    /// The point and its projections onto the spheres bounding the region.
    fn variants(&self, p: &DVector<f64>) -> Vec<DVector<f64>> {
        let mut out = vec![p.clone()];
        let np = p.norm();
        if np > 0.0 {
            out.push(p / np);
            if let HollowSpec::NormLowerBound(l) = self.inst.hollow {
                out.push(p * (l / np));
            }
        }
        out
    }

    fn score(&mut self, p: &DVector<f64>) -> Option<f64> {
        self.evaluated += 1;
        self.inst
            .feasible(p, GRID_FEAS_TOL)
            .then(|| self.inst.h(p))
    }

    fn best_of(&mut self, p: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
        let mut best: Option<(DVector<f64>, f64)> = None;
        for v in self.variants(p) {
            if let Some(s) = self.score(&v) {
                if best.as_ref().is_none_or(|b| s < b.1) {
                    best = Some((v, s));
                }
            }
        }
        best
    }
}

fn lattice(n: usize, points: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; n];
    loop {
        visit(&idx);
        let mut k = 0;
        loop {
            if k == n {
                return;
            }
            idx[k] += 1;
            if idx[k] < points {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Brute-force minimum of `h` over the full feasible region for `n ≤ 3`.
///
/// A uniform grid of spacing `resolution` (at least `0.02` in three
/// dimensions) plus radial projections onto the bounding spheres is scanned,
/// then the best separated candidates are refined on shrinking local grids.
pub fn grid_minimize(inst: &TrsInstance, resolution: f64) -> Result<GridResult> {
    let n = inst.dim();
    if n == 0 || n > 3 {
        return Err(TrsError::InvalidInput(format!("grid oracle needs 1 ≤ n ≤ 3, got {n}")));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(TrsError::InvalidInput(format!("grid resolution {resolution}")));
    }
    let h = if n == 3 { resolution.max(0.02) } else { resolution };
    let points = (2.0 / h).ceil() as usize + 1;
    let step = 2.0 / (points - 1) as f64;
    let mut search = GridSearch { inst, evaluated: 0 };
    let mut found: Vec<(DVector<f64>, f64)> = Vec::new();
    lattice(n, points, |idx| {
        let p = DVector::from_iterator(n, idx.iter().map(|&i| -1.0 + i as f64 * step));
        if p.norm() > 1.0 + step {
            return;
        }
        if let Some(best) = search.best_of(&p) {
            found.push(best);
        }
    });
    if found.is_empty() {
        return Err(TrsError::NoFeasibleGridPoint);
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut seeds: Vec<(DVector<f64>, f64)> = Vec::new();
    for cand in found {
        if seeds.len() == REFINE_SEEDS {
            break;
        }
        if seeds.iter().all(|s| (&s.0 - &cand.0).norm() > 2.0 * step) {
            seeds.push(cand);
        }
    }

    let mut best = seeds[0].clone();
    for (mut centre, mut value) in seeds {
        let mut radius = step;
        while radius >= REFINE_FLOOR {
            let local = radius / 5.0;
            let mut improved = (centre.clone(), value);
            lattice(n, 11, |idx| {
                let p = DVector::from_iterator(
                    n,
                    idx.iter()
                        .enumerate()
                        .map(|(k, &i)| centre[k] + (i as f64 - 5.0) * local),
                );
                if let Some(b) = search.best_of(&p) {
                    if b.1 < improved.1 {
                        improved = b;
                    }
                }
            });
            let moved = (&improved.0 - &centre).norm();
            centre = improved.0;
            value = improved.1;
            if moved < 0.5 * local {
                radius *= 0.5;
            }
        }
        if value < best.1 {
            best = (centre, value);
        }
    }
    Ok(GridResult {
        y: best.0,
        value: best.1,
        evaluated: search.evaluated,
    })
}
