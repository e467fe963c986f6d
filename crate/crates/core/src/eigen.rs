//! Randomized Lanczos estimation of the extreme eigenvalues of a sparse
//! symmetric matrix.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, TrsError};
use crate::linalg::SymSparseMatrix;

/// Constant in the Lanczos iteration budget.
pub const BUDGET_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    /// Rayleigh quotient of `vector_hat`, never below `λ_min(Q)`.
    pub lambda_hat: f64,
    pub vector_hat: DVector<f64>,
    pub epsilon: f64,
    pub delta: f64,
    /// Lanczos steps performed.
    pub iterations: usize,
    /// Iteration budget allowed by the accuracy request.
    pub budget: usize,
    /// `‖Q v - λ v‖` for the returned pair.
    pub residual: f64,
    pub seed: u64,
}

/// `min(n, ceil(C sqrt(norm/ε) ln(n/δ)))`, at least one.
pub fn iteration_budget(n: usize, norm_est: f64, epsilon: f64, delta: f64) -> usize {
    if n == 0 {
        return 0;
    }
    let raw = BUDGET_CONSTANT * (norm_est / epsilon).sqrt() * (n as f64 / delta).ln();
    let raw = if raw.is_finite() { raw.ceil().max(1.0) } else { f64::MAX };
    (raw as usize).clamp(1, n)
}

struct RitzPair {
    theta: f64,
    vector: DVector<f64>,
    iterations: usize,
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
        let nv: f64 = v.norm();
        if nv > 0.0 {
            return v / nv;
        }
    }
}

fn orthogonalize(w: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // Two classical Gram-Schmidt passes.
    for _ in 0..2 {
        for v in basis {
            let c = v.dot(w);
            w.axpy(-c, v, 1.0);
        }
    }
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` strictly below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = f64::EPSILON * (alpha[i].abs() + x.abs() + 1e-300);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by bisection.
fn tridiag_min_eig(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * span;
    hi += 1e-12 * span;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - σ I) x = rhs` for tridiagonal `T` by Gaussian elimination
/// with partial pivoting; tiny pivots are nudged away from zero.
fn tridiag_shifted_solve(alpha: &[f64], beta: &[f64], sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let scale = alpha.iter().chain(beta.iter()).fold(1e-300_f64, |a, v| a.max(v.abs()));
    let tiny = f64::EPSILON * scale;
    // Row i holds entries in columns i, i+1, i+2 after elimination.
    let mut d: Vec<f64> = alpha.iter().map(|a| a - sigma).collect();
    let mut u1: Vec<f64> = (0..k).map(|i| if i + 1 < k { beta[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0; k];
    let mut l: Vec<f64> = (0..k).map(|i| if i + 1 < k { beta[i] } else { 0.0 }).collect();
    let mut b = rhs.to_vec();
    for i in 0..k.saturating_sub(1) {
        // Sub-diagonal entry below the pivot is l[i]; row i+1 has (l[i], d[i+1], u1[i+1]).
        if l[i].abs() > d[i].abs() {
            // Swap rows i and i+1.
            let (ri0, ri1, ri2) = (d[i], u1[i], u2[i]);
            let (rj0, rj1, rj2) = (l[i], d[i + 1], u1[i + 1]);
            d[i] = rj0;
            u1[i] = rj1;
            u2[i] = rj2;
            l[i] = ri0;
            d[i + 1] = ri1;
            u1[i + 1] = ri2;
            b.swap(i, i + 1);
        }
        if d[i].abs() < tiny {
            d[i] = tiny;
        }
        let f = l[i] / d[i];
        d[i + 1] -= f * u1[i];
        u1[i + 1] -= f * u2[i];
        b[i + 1] -= f * b[i];
        l[i] = 0.0;
    }
    if k > 0 && d[k - 1].abs() < tiny {
        d[k - 1] = tiny;
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = b[i];
        if i + 1 < k {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < k {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    x
}

/// Unit eigenvector of the tridiagonal matrix for the eigenvalue `theta`.
fn tridiag_eigvec(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let k = alpha.len();
    let mut x: Vec<f64> = (0..k).map(|i| 1.0 + 0.1 * ((i % 7) as f64)).collect();
    for _ in 0..3 {
        x = tridiag_shifted_solve(alpha, beta, theta, &x);
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx > 0.0 && nx.is_finite() {
            x.iter_mut().for_each(|v| *v /= nx);
        } else {
            x = vec![0.0; k];
            x[0] = 1.0;
        }
    }
    x
}

/// Lanczos with full reorthogonalization on `sign · Q`, returning the Ritz pair
/// of its smallest eigenvalue (as an eigenpair of `sign · Q`).
///
/// The residual test may only end the run once `min_steps` steps are done;
/// an invariant Krylov subspace or `max_steps` ends it unconditionally.
fn lanczos_min(
    q: &SymSparseMatrix,
    sign: f64,
    tol: f64,
    min_steps: usize,
    max_steps: usize,
    rng: &mut ChaCha8Rng,
    scale: f64,
) -> RitzPair {
    let n = q.dim();
    let max_steps = max_steps.clamp(1, n);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(max_steps);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_steps);
    let mut beta: Vec<f64> = Vec::with_capacity(max_steps);
    let mut w = DVector::zeros(n);
    let mut v = random_unit(n, rng);
    let breakdown = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let mut s: Vec<f64>;

    loop {
        q.matvec_into(&v, &mut w);
        w *= sign;
        let a = v.dot(&w);
        w.axpy(-a, &v, 1.0);
        if let (Some(prev), Some(b)) = (basis.last(), beta.last()) {
            w.axpy(-*b, prev, 1.0);
        }
        basis.push(v.clone());
        alpha.push(a);
        orthogonalize(&mut w, &basis);
        let b = w.norm();

        let theta = tridiag_min_eig(&alpha, &beta);
        s = tridiag_eigvec(&alpha, &beta, theta);
        let estimate = b * s.last().map_or(0.0, |x| x.abs());
        let steps = basis.len();
        if (estimate <= tol && steps >= min_steps) || b <= breakdown || steps >= max_steps {
            break;
        }
        beta.push(b);
        v = &w / b;
    }

    let mut x = DVector::zeros(n);
    for (j, bj) in basis.iter().enumerate() {
        x.axpy(s[j], bj, 1.0);
    }
    let nx = x.norm();
    x /= nx;
    let qx = q.apply(&x) * sign;
    RitzPair {
        theta: x.dot(&qx),
        vector: x,
        iterations: basis.len(),
    }
}

/// Estimates `λ_min(Q)` with an approximate eigenvector.
///
/// The returned value is the Rayleigh quotient of the Ritz vector, rounded
/// upward by a small multiple of the unit roundoff so that it never falls
/// below the true minimum.
pub fn min_eigenvalue(q: &SymSparseMatrix, epsilon: f64, delta: f64, seed: u64) -> Result<EigenEstimate> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(TrsError::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TrsError::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = q.dim();
    if n == 0 {
        return Err(TrsError::InvalidInput("empty matrix".into()));
    }
    let norm = q.inf_norm();
    let budget = iteration_budget(n, norm, epsilon, delta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Below this the residual is at the level of rounding in the products.
    let floor = 64.0 * (n as f64).sqrt() * f64::EPSILON * norm;
    let tol = epsilon.max(floor);
    let pair = lanczos_min(q, 1.0, tol, budget, n, &mut rng, norm);
    let residual = (q.apply(&pair.vector) - &pair.vector * pair.theta).norm();
    if residual > tol {
        return Err(TrsError::IterationCapExceeded {
            iterations: pair.iterations,
            residual,
        });
    }
    let guard = 16.0 * n as f64 * f64::EPSILON * norm;
    Ok(EigenEstimate {
        lambda_hat: pair.theta + guard,
        vector_hat: pair.vector,
        epsilon,
        delta,
        iterations: pair.iterations,
        budget,
        residual,
        seed,
    })
}

/// Upper estimate of `‖Q‖₂`: the largest extreme Ritz magnitude from runs on
/// `Q` and `-Q`, widened by the residual and inflated by 1%.
pub fn spectral_norm_estimate(q: &SymSparseMatrix, seed: u64) -> Result<f64> {
    let n = q.dim();
    if n == 0 {
        return Ok(0.0);
    }
    let norm = q.inf_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let tol = 1e-6 * norm;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut worst = 0.0_f64;
    for sign in [1.0, -1.0] {
        let pair = lanczos_min(q, sign, tol, 1, n, &mut rng, norm);
        let r = (q.apply(&pair.vector) * sign - &pair.vector * pair.theta).norm();
        worst = worst.max(pair.theta.abs() + r);
    }
    Ok((1.01 * worst).min(1.01 * norm))
}
