//! Shifted convex surrogate `f_γ(y) = yᵀ(Q - γI)y + 2gᵀy + γ`.
//!
//! With `γ ≤ λ_min(Q)` the surrogate is convex, agrees with `h` on the unit
//! sphere and lies below it inside the ball.

use nalgebra::DVector;

use crate::eigen::{spectral_norm_estimate, EigenEstimate};
use crate::error::{Result, TrsError};
use crate::linalg::SymSparseMatrix;

#[derive(Debug, Clone)]
pub struct ReformulatedObjective<'a> {
    q: &'a SymSparseMatrix,
    g: &'a DVector<f64>,
    pub gamma: f64,
    pub epsilon_used: f64,
    /// Upper estimate of `‖Q‖₂` used for the smoothness constant.
    pub norm_estimate: f64,
    /// `2 (‖Q‖_est - γ)`.
    pub smoothness_l: f64,
    /// Whether the constant `γ` is added (false for the plain convex objective).
    shifted: bool,
}

impl<'a> ReformulatedObjective<'a> {
    /// Surrogate with `γ = λ̂ - ε`; the norm estimate is computed here.
    pub fn build(q: &'a SymSparseMatrix, g: &'a DVector<f64>, est: &EigenEstimate) -> Result<Self> {
        let norm = spectral_norm_estimate(q, est.seed)?;
        Self::with_norm(q, g, est, norm)
    }

    pub fn with_norm(
        q: &'a SymSparseMatrix,
        g: &'a DVector<f64>,
        est: &EigenEstimate,
        norm_estimate: f64,
    ) -> Result<Self> {
        check_dims(q, g)?;
        if est.lambda_hat >= 0.0 {
            return Err(TrsError::NotNonconvex(est.lambda_hat));
        }
        if est.vector_hat.len() != q.dim() {
            return Err(TrsError::DimensionMismatch("estimate from another matrix".into()));
        }
        let gamma = est.lambda_hat - est.epsilon;
        let norm_estimate = norm_estimate.max(-est.lambda_hat);
        Ok(Self {
            q,
            g,
            gamma,
            epsilon_used: est.epsilon,
            norm_estimate,
            smoothness_l: 2.0 * (norm_estimate - gamma),
            shifted: true,
        })
    }

    /// Unshifted objective `h` itself, for the case `λ_min(Q) ≥ 0`.
    pub fn convex(q: &'a SymSparseMatrix, g: &'a DVector<f64>, norm_estimate: f64) -> Result<Self> {
        check_dims(q, g)?;
        Ok(Self {
            q,
            g,
            gamma: 0.0,
            epsilon_used: 0.0,
            norm_estimate,
            smoothness_l: (2.0 * norm_estimate).max(f64::MIN_POSITIVE),
            shifted: false,
        })
    }

    pub fn q(&self) -> &SymSparseMatrix {
        self.q
    }

    pub fn g(&self) -> &DVector<f64> {
        self.g
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    fn check(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.dim() {
            return Err(TrsError::DimensionMismatch(format!(
                "point of length {} for an n = {} objective",
                y.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn constant(&self) -> f64 {
        if self.shifted {
            self.gamma
        } else {
            0.0
        }
    }

    /// Value and gradient given a precomputed `Q y`.
    pub(crate) fn value_grad_with(&self, y: &DVector<f64>, qy: &DVector<f64>) -> (f64, DVector<f64>) {
        let mut grad = qy - y * self.gamma;
        let value = grad.dot(y) + 2.0 * self.g.dot(y) + self.constant();
        grad += self.g;
        grad *= 2.0;
        (value, grad)
    }

    pub(crate) fn value_with(&self, y: &DVector<f64>, qy: &DVector<f64>) -> f64 {
        qy.dot(y) - self.gamma * y.norm_squared() + 2.0 * self.g.dot(y) + self.constant()
    }

    pub fn eval_f(&self, y: &DVector<f64>) -> Result<f64> {
        self.check(y)?;
        Ok(self.value_with(y, &self.q.apply(y)))
    }

    pub fn grad_f(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.eval_grad(y)?.1)
    }

    /// Value and gradient sharing one product with `Q`.
    pub fn eval_grad(&self, y: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        self.check(y)?;
        Ok(self.value_grad_with(y, &self.q.apply(y)))
    }
}

fn check_dims(q: &SymSparseMatrix, g: &DVector<f64>) -> Result<()> {
    if q.dim() != g.len() {
        return Err(TrsError::DimensionMismatch(format!(
            "Q is {0}x{0} but g has length {1}",
            q.dim(),
            g.len()
        )));
    }
    Ok(())
}

/// `h(y) = yᵀQy + 2gᵀy`.
pub fn eval_h(q: &SymSparseMatrix, g: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    check_dims(q, g)?;
    if y.len() != g.len() {
        return Err(TrsError::DimensionMismatch("point length".into()));
    }
    Ok(q.quad_form(y) + 2.0 * g.dot(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::min_eigenvalue;
    use crate::linalg::dense_eig;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exact_estimate(lambda: f64, v: DVector<f64>, eps: f64) -> EigenEstimate {
        EigenEstimate {
            lambda_hat: lambda,
            vector_hat: v,
            epsilon: eps,
            delta: 0.01,
            iterations: 0,
            budget: 0,
            residual: 0.0,
            seed: 0,
        }
    }

    fn random_instance(n: usize, rng: &mut ChaCha8Rng) -> (SymSparseMatrix, DVector<f64>) {
        let mut t = Vec::new();
        for i in 0..n {
            for j in i..n {
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        let g = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
        (SymSparseMatrix::from_triplets(n, t).unwrap(), g)
    }

    #[test]
    fn surrogate_matches_closed_form() {
        // Q = diag(1, -2), g = (-3/2, 0): f(y) = 3y₁² - 3y₁ - 2.
        let q = SymSparseMatrix::diagonal(&[1.0, -2.0]);
        let g = DVector::from_vec(vec![-1.5, 0.0]);
        let est = exact_estimate(-2.0, DVector::from_vec(vec![0.0, 1.0]), 1e-300);
        let obj = ReformulatedObjective::with_norm(&q, &g, &est, 2.02).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let y = DVector::from_vec(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            let want = 3.0 * y[0] * y[0] - 3.0 * y[0] - 2.0;
            assert!((obj.eval_f(&y).unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn origin_and_eigenvector_values() {
        let q = SymSparseMatrix::diagonal(&[2.0, -1.0, 0.5]);
        let g = DVector::from_vec(vec![0.3, -0.2, 0.1]);
        let d = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let est = exact_estimate(-1.0, d.clone(), 1e-300);
        let obj = ReformulatedObjective::with_norm(&q, &g, &est, 2.02).unwrap();
        let (v, gr) = obj.eval_grad(&DVector::zeros(3)).unwrap();
        assert_eq!(v, obj.gamma);
        assert_eq!(gr, &g * 2.0);
        let fd = obj.eval_f(&d).unwrap();
        assert!((fd - eval_h(&q, &g, &d).unwrap()).abs() < 1e-14);
        assert!((fd - (-1.0 + 2.0 * g.dot(&d))).abs() < 1e-14);
    }

    #[test]
    fn zero_gradient_term_gives_eigenvalue() {
        let q = SymSparseMatrix::diagonal(&[3.0, -0.7]);
        let g = DVector::zeros(2);
        let est = exact_estimate(-0.7, DVector::from_vec(vec![0.0, -1.0]), 1e-300);
        let obj = ReformulatedObjective::with_norm(&q, &g, &est, 3.03).unwrap();
        assert!((obj.eval_f(&DVector::from_vec(vec![0.0, -1.0])).unwrap() + 0.7).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonnegative_estimate() {
        let q = SymSparseMatrix::identity(2);
        let g = DVector::zeros(2);
        let est = exact_estimate(1.0, DVector::from_vec(vec![1.0, 0.0]), 1e-8);
        assert!(matches!(
            ReformulatedObjective::with_norm(&q, &g, &est, 1.0),
            Err(TrsError::NotNonconvex(_))
        ));
    }

    #[test]
    fn crude_shift_keeps_small_psd_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..5 {
            let (q, g) = random_instance(20, &mut rng);
            let est = min_eigenvalue(&q, 1e-2, 0.01, seed).unwrap();
            let obj = ReformulatedObjective::build(&q, &g, &est).unwrap();
            let mut shifted = q.to_dense();
            for i in 0..20 {
                shifted[(i, i)] -= obj.gamma;
            }
            let m = dense_eig(&shifted).unwrap().min();
            assert!(m >= -1e-12 && m <= 2e-2 + 1e-12, "{m}");
        }
    }

    #[test]
    fn finite_difference_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (q, g) = random_instance(8, &mut rng);
        let est = min_eigenvalue(&q, 1e-8, 0.01, 0).unwrap();
        let obj = ReformulatedObjective::build(&q, &g, &est).unwrap();
        for _ in 0..10 {
            let y = DVector::from_iterator(8, (0..8).map(|_| rng.random_range(-0.5..0.5)));
            let grad = obj.grad_f(&y).unwrap();
            let h = 1e-6;
            for i in 0..8 {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[i] += h;
                ym[i] -= h;
                let fd = (obj.eval_f(&yp).unwrap() - obj.eval_f(&ym).unwrap()) / (2.0 * h);
                assert!((fd - grad[i]).abs() <= 1e-6 * grad[i].abs().max(1.0));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn underestimates_inside_ball(seed in 0u64..1000, n in 2usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (q, g) = random_instance(n, &mut rng);
            let est = min_eigenvalue(&q, 1e-8, 0.01, seed).unwrap();
            prop_assume!(est.lambda_hat < 0.0);
            let obj = ReformulatedObjective::build(&q, &g, &est).unwrap();
            let scale = 1.0 + obj.norm_estimate + g.norm();
            for _ in 0..200 {
                let mut y = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
                let ny = y.norm();
                if ny > 1.0 { y /= ny; }
                let f = obj.eval_f(&y).unwrap();
                let h = eval_h(&q, &g, &y).unwrap();
                prop_assert!(f <= h + 1e-12 * scale);
                // h - f = -γ (1 - ‖y‖²)
                let gap = -obj.gamma * (1.0 - y.norm_squared());
                prop_assert!(((h - f) - gap).abs() <= 1e-12 * scale);
            }
            let mut u = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
            u /= u.norm();
            let diff = (obj.eval_f(&u).unwrap() - eval_h(&q, &g, &u).unwrap()).abs();
            prop_assert!(diff <= 1e-12 * scale);
        }
    }
}
