use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense row-major document representations in a reduced space.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n_rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(n_rows: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if n_rows.checked_mul(dim) != Some(values.len()) {
            return Err(Error::contract(format!(
                "{} values cannot fill a {n_rows}x{dim} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("embedding values must be finite"));
        }
        Ok(EmbeddingMatrix { n_rows, dim, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::contract("rows differ in length"));
        }
        Self::new(rows.len(), dim, rows.concat())
    }

    pub fn zeros(n_rows: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            n_rows,
            dim,
            values: vec![0.0; n_rows * dim],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact(0) would panic; a zero-width matrix has empty rows.
        (0..self.n_rows).map(move |i| self.row(i))
    }

    /// Gather the listed rows into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> EmbeddingMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.dim);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        EmbeddingMatrix {
            n_rows: rows.len(),
            dim: self.dim,
            values,
        }
    }

    pub fn scaled(&self, factor: f64) -> EmbeddingMatrix {
        EmbeddingMatrix {
            n_rows: self.n_rows,
            dim: self.dim,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_rows, self.dim, &self.values)
    }

    #[cfg(test)]
    pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let mut values = Vec::with_capacity(m.len());
        for row in m.row_iter() {
            values.extend(row.iter());
        }
        EmbeddingMatrix {
            n_rows: m.nrows(),
            dim: m.ncols(),
            values,
        }
    }

    pub(crate) fn from_raw(n_rows: usize, dim: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n_rows * dim);
        EmbeddingMatrix { n_rows, dim, values }
    }
}
