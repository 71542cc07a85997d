use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::vectorspace::SparseVector;

/// Compressed sparse rows, used for the matrix–block products of the
/// randomized SVD.
#[derive(Debug, Clone)]
pub(crate) struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub(crate) fn from_rows(rows: &[SparseVector]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, SparseVector::dim);
        if let Some(r) = rows.iter().find(|r| r.dim() != n_cols) {
            return Err(Error::contract(format!(
                "rows have mixed dimensions ({} and {n_cols})",
                r.dim()
            )));
        }
        let nnz = rows.iter().map(SparseVector::nnz).sum();
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for r in rows {
            indices.extend_from_slice(r.indices());
            values.extend_from_slice(r.values());
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            n_rows: rows.len(),
            n_cols,
            indptr,
            indices,
            values,
        })
    }

    pub(crate) fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub(crate) fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub(crate) fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub(crate) fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0u32; self.indices.len()];
        let mut values = vec![0.0; self.values.len()];
        for row in 0..self.n_rows {
            for k in self.indptr[row]..self.indptr[row + 1] {
                let col = self.indices[k] as usize;
                let dst = next[col];
                indices[dst] = row as u32;
                values[dst] = self.values[k];
                next[col] += 1;
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            indptr,
            indices,
            values,
        }
    }

    /// `self * dense`. Each output row is produced by one task, so the
    /// result does not depend on thread scheduling.
    pub(crate) fn mul_dense(&self, dense: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(dense.nrows(), self.n_cols);
        let width = dense.ncols();
        let dense_rows: Vec<f64> = dense.transpose().as_slice().to_vec();
        let mut out = vec![0.0; self.n_rows * width];
        out.par_chunks_mut(width.max(1))
            .take(self.n_rows)
            .enumerate()
            .for_each(|(row, acc)| {
                for k in self.indptr[row]..self.indptr[row + 1] {
                    let v = self.values[k];
                    let src = &dense_rows[self.indices[k] as usize * width..][..width];
                    for (a, s) in acc.iter_mut().zip(src) {
                        *a += v * s;
                    }
                }
            });
        DMatrix::from_row_slice(self.n_rows, width, &out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_dense() {
        let rows = vec![
            SparseVector::new(3, vec![(0, 1.0), (2, 2.0)]).unwrap(),
            SparseVector::zeros(3),
            SparseVector::new(3, vec![(1, -3.0)]).unwrap(),
        ];
        let a = CsrMatrix::from_rows(&rows).unwrap();
        let dense_a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, -3.0, 0.0]);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.mul_dense(&b), &dense_a * &b);
        assert_eq!(a.transpose().mul_dense(&b), dense_a.transpose() * &b);
        assert_eq!(a.frobenius_sq(), 14.0);
    }
}
