use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Result, TrsError};

/// Default dimension cap for dense factorizations.
pub const DEFAULT_DENSE_CAP: usize = 500;

/// Full spectrum of a dense symmetric matrix, ascending.
#[derive(Debug, Clone)]
pub struct DenseEig {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors, column `i` paired with `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
}

impl DenseEig {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Largest eigenvalue magnitude, i.e. the spectral norm.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }
}

/// Symmetric eigendecomposition (Householder tridiagonalization followed by
/// implicit QR sweeps), with the spectrum sorted ascending.
pub fn dense_eig(m: &DMatrix<f64>) -> Result<DenseEig> {
    dense_eig_capped(m, DEFAULT_DENSE_CAP)
}

pub fn dense_eig_capped(m: &DMatrix<f64>, cap: usize) -> Result<DenseEig> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(TrsError::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if n > cap {
        return Err(TrsError::InvalidInput(format!(
            "dense eigendecomposition requested for n = {n} above the cap {cap}"
        )));
    }
    if n == 0 {
        return Ok(DenseEig {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    // Symmetrize so round-off in the caller's assembly cannot leak in.
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 100 * n.max(10)).ok_or_else(|| {
        TrsError::ConvergenceFailure(format!("symmetric eigensolver, n = {n}"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(DenseEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Orthonormal basis of the eigenvectors whose eigenvalues satisfy
/// `|λ| <= tol * ‖M‖`. If `M` vanishes identically the whole space is returned.
pub fn null_space_basis(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let eig = dense_eig(m)?;
    Ok(kernel_from_eig(&eig, tol))
}

pub(crate) fn kernel_from_eig(eig: &DenseEig, tol: f64) -> DMatrix<f64> {
    let n = eig.eigenvalues.len();
    let thresh = tol * eig.norm();
    let cols: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i].abs() <= thresh)
        .collect();
    let mut basis = DMatrix::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        basis.set_column(j, &eig.eigenvectors.column(i));
    }
    basis
}

/// Singular values with right singular vectors of a (possibly rectangular)
/// matrix. Short-wide inputs are padded with zero rows, so exactly `ncols`
/// values are returned, sorted ascending with the matching columns of `V`.
pub(crate) fn right_singular_pairs(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::try_new(padded, false, true, f64::EPSILON, 200 * cols.max(10))
        .ok_or_else(|| TrsError::ConvergenceFailure("singular value decomposition".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| TrsError::ConvergenceFailure("SVD did not return V".into()))?;
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let values = DVector::from_iterator(k, order.iter().map(|&i| svd.singular_values[i]));
    let mut vecs = DMatrix::zeros(cols, k);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &v_t.row(src).transpose());
    }
    Ok((values, vecs))
}

/// Numerical rank with the relative threshold `tol * σ_max`.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let (sv, _) = right_singular_pairs(m)?;
    let smax = sv.iter().fold(0.0_f64, |a, v| a.max(*v));
    Ok(sv.iter().filter(|&&s| s > tol * smax && s > 0.0).count())
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = W`.
pub fn cholesky(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = w.nrows();
    if n != w.ncols() {
        return Err(TrsError::DimensionMismatch(format!(
            "Cholesky of a {}x{} matrix",
            w.nrows(),
            w.ncols()
        )));
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = w[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(TrsError::NotPositiveDefinite { pivot: j });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = w[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub(crate) fn forward_substitute(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `Lᵀ x = b` for lower-triangular `L`.
pub(crate) fn backward_substitute_transposed(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let eig = dense_eig(&m).unwrap();
        assert_eq!(eig.eigenvalues.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn swap_matrix_has_plus_minus_one() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let eig = dense_eig(&m).unwrap();
        assert_relative_eq!(eig.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(eig.eigenvalues[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn random_reconstruction_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_symmetric(30, &mut rng);
        let eig = dense_eig(&m).unwrap();
        let v = &eig.eigenvectors;
        let rebuilt = v * DMatrix::from_diagonal(&eig.eigenvalues) * v.transpose();
        assert!((rebuilt - &m).abs().max() <= 1e-10);
        let gram = v.transpose() * v;
        assert!((gram - DMatrix::identity(30, 30)).abs().max() <= 1e-12);
        let norm = eig.norm();
        for i in 0..30 {
            let col = v.column(i);
            let r = &m * col - col * eig.eigenvalues[i];
            assert!(r.norm() <= 1e-10 * norm);
        }
        assert!(eig.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_respects_cap() {
        let m = DMatrix::<f64>::identity(4, 4);
        assert!(dense_eig_capped(&m, 3).is_err());
    }

    #[test]
    fn explicit_kernel() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, 5.0]));
        let k = null_space_basis(&m, 1e-8).unwrap();
        assert_eq!(k.ncols(), 2);
        for j in 0..2 {
            assert!(k[(2, j)].abs() < 1e-14);
        }
    }

    #[test]
    fn shifted_kernel_of_simple_eigenvalue() {
        // Q = diag(1, -1), λ = -1  =>  Q - λI = diag(2, 0)
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0]));
        let k = null_space_basis(&m, 1e-8).unwrap();
        assert_eq!(k.ncols(), 1);
        assert_relative_eq!(k[(1, 0)].abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn constructed_double_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 8;
        let basis = nalgebra::linalg::QR::new(random_symmetric(n, &mut rng)).q();
        let mut spectrum = vec![-3.0, -3.0];
        spectrum.extend((0..n - 2).map(|i| i as f64 + 0.5));
        let q = &basis * DMatrix::from_diagonal(&DVector::from_vec(spectrum)) * basis.transpose();
        let lam = dense_eig(&q).unwrap().min();
        let shifted = &q - DMatrix::identity(n, n) * lam;
        assert_eq!(null_space_basis(&shifted, 1e-8).unwrap().ncols(), 2);
    }

    #[test]
    fn cholesky_small_cases() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(cholesky(&id).unwrap(), id);
        let w = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]);
        let l = cholesky(&w).unwrap();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2.0]));
    }

    #[test]
    fn cholesky_reports_failing_pivot() {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            cholesky(&w),
            Err(TrsError::NotPositiveDefinite { pivot: 1 })
        ));
    }

    #[test]
    fn cholesky_random_spd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_fn(20, 20, |_, _| rng.random_range(-1.0..1.0));
        let w = &a * a.transpose() + DMatrix::identity(20, 20);
        let l = cholesky(&w).unwrap();
        let err = (&l * l.transpose() - &w).abs().max();
        assert!(err <= 1e-12 * w.abs().max());
        let b = DVector::from_fn(20, |i, _| i as f64 - 3.0);
        let x = backward_substitute_transposed(&l, &forward_substitute(&l, &b));
        assert!((&w * x - b).norm() < 1e-9);
    }

    #[test]
    fn rank_of_rectangular() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        assert_eq!(rank(&m, 1e-9).unwrap(), 1);
        let (sv, v) = right_singular_pairs(&m).unwrap();
        assert_eq!(sv.len(), 3);
        assert!(sv[0].abs() < 1e-12 && sv[1].abs() < 1e-12);
        assert!((&m * v.column(0)).norm() < 1e-12);
    }
}
