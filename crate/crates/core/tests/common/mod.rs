#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use trskit::{parse_instance, SymSparseMatrix, TrsInstance};

pub fn fixture(name: &str) -> TrsInstance {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_instance(&text).unwrap()
}

pub fn gaussian_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub fn unit_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = gaussian_vec(n, rng);
        let nv = v.norm();
        if nv > 1e-3 {
            return v / nv;
        }
    }
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    m.qr().q()
}

/// Orthogonal matrix whose first column is `d`.
pub fn orthogonal_with(d: &DVector<f64>, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = d.len();
    let mut m = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    m.set_column(0, d);
    let mut q = m.qr().q();
    if q.column(0).dot(d) < 0.0 {
        q.set_column(0, &(-q.column(0)));
    }
    q
}

pub fn symmetric(u: &DMatrix<f64>, eig: &[f64]) -> DMatrix<f64> {
    let m = u * DMatrix::from_diagonal(&DVector::from_column_slice(eig)) * u.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn sparse(m: &DMatrix<f64>) -> SymSparseMatrix {
    SymSparseMatrix::from_dense(m).unwrap()
}

/// Spectrum with a negative minimum separated from the rest by at least `gap`.
pub fn spectrum(n: usize, gap: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let lo = -rng.random_range(0.5..3.0);
    let mut eig = vec![lo];
    for _ in 1..n {
        eig.push(rng.random_range(lo + gap..3.0));
    }
    eig
}

pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    (&m + m.transpose()) * 0.5
}

/// Random sparse symmetric matrix with roughly `per_row` off-diagonal entries
/// per row.
pub fn random_sparse(n: usize, per_row: usize, rng: &mut ChaCha8Rng) -> SymSparseMatrix {
    let mut t = std::collections::BTreeMap::new();
    for i in 0..n {
        t.insert((i, i), rng.random_range(-2.0..2.0));
        for _ in 0..per_row / 2 {
            let j = rng.random_range(0..n);
            if j != i {
                t.insert((i.min(j), i.max(j)), rng.random_range(-1.0..1.0));
            }
        }
    }
    SymSparseMatrix::from_triplets(n, t.into_iter().map(|((i, j), v)| (i, j, v)).collect()).unwrap()
}

/// Unit vectors on a grid of angles, for `n = 2` sampling.
pub fn circle(k: usize) -> Vec<DVector<f64>> {
    (0..k)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / k as f64;
            DVector::from_vec(vec![a.cos(), a.sin()])
        })
        .collect()
}
