//! Symmetric sparse matrices over the free degrees of freedom and their
//! Cholesky factorizations.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{MatMut, Side};

use crate::error::{Error, Result};

/// Lower-triangular compressed-column pattern with a cached symbolic factorization.
pub(crate) struct SparsePattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    symbolic: SymbolicLlt<usize>,
}

impl SparsePattern {
    /// `entries` are `(row, col)` pairs with `row ≥ col`; duplicates are merged.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for d in 0..n {
            cols[d].push(d);
        }
        for (r, c) in entries {
            debug_assert!(r >= c);
            cols[c].push(r);
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for col in &mut cols {
            col.sort_unstable();
            col.dedup();
            row_idx.extend_from_slice(col);
            col_ptr.push(row_idx.len());
        }
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &col_ptr, None, &row_idx);
        let symbolic = SymbolicLlt::try_new(sym, Side::Lower).map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Self { n, col_ptr, row_idx, symbolic })
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Position of `(row, col)` in the value array.
    pub fn index(&self, row: usize, col: usize) -> usize {
        let (row, col) = if row >= col { (row, col) } else { (col, row) };
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        range.start + self.row_idx[range].binary_search(&row).expect("entry outside the sparsity pattern")
    }

    pub fn diagonal_max(&self, values: &[f64]) -> f64 {
        (0..self.n).map(|d| values[self.col_ptr[d]]).fold(0.0, f64::max)
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shift_diagonal(&self, values: &mut [f64], shift: f64) {
        for d in 0..self.n {
            values[self.col_ptr[d]] += shift;
        }
    }

    pub fn factor(&self, values: &[f64]) -> Result<Factor> {
        let sym = SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.col_ptr, None, &self.row_idx);
        let mat = SparseColMatRef::new(sym, values);
        let llt = Llt::try_new_with_symbolic(self.symbolic.clone(), mat, Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Factor { n: self.n, llt })
    }

    /// `y = A x` for the symmetric matrix stored by its lower triangle.
    #[cfg(test)]
    pub fn mul(&self, values: &[f64], x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                y[r] += values[k] * x[c];
                if r != c {
                    y[c] += values[k] * x[r];
                }
            }
        }
        y
    }
}

pub(crate) struct Factor {
    n: usize,
    llt: Llt<usize, f64>,
}

impl Factor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.llt.solve_in_place(MatMut::from_column_major_slice_mut(&mut x, self.n, 1));
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve() {
        let n = 50;
        let pattern = SparsePattern::new(n, (1..n).map(|i| (i, i - 1))).unwrap();
        let mut vals = vec![0.0; pattern.nnz()];
        for i in 0..n {
            vals[pattern.index(i, i)] = 2.0;
            if i > 0 {
                vals[pattern.index(i - 1, i)] = -1.0;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = pattern.mul(&vals, &x);
        let y = pattern.factor(&vals).unwrap().solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
        vals[pattern.index(3, 3)] = -5.0;
        assert!(pattern.factor(&vals).is_err());
    }
}
