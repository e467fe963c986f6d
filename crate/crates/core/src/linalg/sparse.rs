use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrsError};

/// Sparse symmetric matrix stored as its upper triangle.
///
/// Each off-diagonal entry is stored once with `row < col`; products use the
/// implicit symmetric completion. A row-compressed copy of the full pattern is
/// kept alongside the triplets so that [`SymSparseMatrix::matvec`] touches
/// every stored nonzero once.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparseMatrix {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymSparseMatrix {
    /// Builds a matrix from triplets. Entries given in the lower triangle are
    /// mirrored into the upper one; a pair touching the same `(row, col)`
    /// position twice is rejected.
    pub fn from_triplets(n: usize, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut entries = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(TrsError::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside a {n}x{n} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(TrsError::InvalidInput(format!("non-finite entry at ({r}, {c})")));
            }
            let (r, c) = if r <= c { (r, c) } else { (c, r) };
            entries.push((r, c, v));
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(TrsError::InvalidInput(format!(
                "duplicate entry ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::assemble(n, entries))
    }

    fn assemble(n: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, c, _) in &entries {
            counts[r + 1] += 1;
            if r != c {
                counts[c + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let nnz = row_ptr[n];
        let mut fill = counts;
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        for &(r, c, v) in &entries {
            col_idx[fill[r]] = c;
            values[fill[r]] = v;
            fill[r] += 1;
            if r != c {
                col_idx[fill[c]] = r;
                values[fill[c]] = v;
                fill[c] += 1;
            }
        }
        Self {
            n,
            entries,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::assemble(n, Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let entries = diag
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, i, *v))
            .collect();
        Self::assemble(diag.len(), entries)
    }

    /// Takes the upper triangle of a dense matrix, dropping exact zeros. The
    /// caller is responsible for `m` being symmetric.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(TrsError::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut triplets = Vec::new();
        for r in 0..n {
            for c in r..n {
                let v = m[(r, c)];
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(n, triplets)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Upper-triangle triplets, sorted by `(row, col)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Stored nonzeros of the full symmetric pattern.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.n {
            return Err(TrsError::DimensionMismatch(format!(
                "matvec with a vector of length {} against dimension {}",
                v.len(),
                self.n
            )));
        }
        let mut out = DVector::zeros(self.n);
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    /// Unchecked product into a preallocated buffer; lengths must equal `dim()`.
    pub(crate) fn matvec_into(&self, v: &DVector<f64>, out: &mut DVector<f64>) {
        debug_assert_eq!(v.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * v[self.col_idx[k]];
            }
            out[i] = acc;
        }
    }

    pub(crate) fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        self.matvec_into(v, &mut out);
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
        m
    }

    /// Maximum absolute row sum. Always an upper bound on the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.values[k].abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Quadratic form `vᵀ M v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        self.apply(v).dot(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matvec_is_identity() {
        let q = SymSparseMatrix::identity(4);
        let v = DVector::from_vec(vec![1.0, -2.0, 3.5, 0.25]);
        assert_eq!(q.matvec(&v).unwrap(), v);
    }

    #[test]
    fn single_offdiagonal_entry_is_mirrored() {
        let q = SymSparseMatrix::from_triplets(2, vec![(0, 1, 1.0)]).unwrap();
        let v = DVector::from_vec(vec![2.0, 3.0]);
        assert_eq!(q.matvec(&v).unwrap().as_slice(), &[3.0, 2.0]);
        assert_eq!(q.nnz(), 2);
    }

    #[test]
    fn lower_entries_are_moved_to_upper() {
        let q = SymSparseMatrix::from_triplets(3, vec![(2, 0, 5.0)]).unwrap();
        assert_eq!(q.entries(), &[(0, 2, 5.0)]);
    }

    #[test]
    fn rejects_duplicates_and_bad_indices() {
        assert!(matches!(
            SymSparseMatrix::from_triplets(2, vec![(0, 1, 1.0), (1, 0, 2.0)]),
            Err(TrsError::InvalidInput(_))
        ));
        assert!(matches!(
            SymSparseMatrix::from_triplets(2, vec![(0, 2, 1.0)]),
            Err(TrsError::DimensionMismatch(_))
        ));
        assert!(SymSparseMatrix::from_triplets(2, vec![(0, 0, f64::NAN)]).is_err());
    }

    #[test]
    fn matvec_rejects_wrong_length() {
        let q = SymSparseMatrix::identity(3);
        assert!(matches!(
            q.matvec(&DVector::zeros(2)),
            Err(TrsError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn inf_norm_bounds_diagonal() {
        let q = SymSparseMatrix::diagonal(&[1.0, -2.0]);
        assert_eq!(q.inf_norm(), 2.0);
    }
}
