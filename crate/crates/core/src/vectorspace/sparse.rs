use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse row over a vocabulary: strictly increasing indices, finite nonzero values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new(dim: usize, entries: Vec<(u32, f64)>) -> Result<Self> {
        let (indices, values): (Vec<u32>, Vec<f64>) = entries.into_iter().unzip();
        Self::from_parts(dim, indices, values)
    }

    pub fn from_parts(dim: usize, indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::contract("index and value arrays differ in length"));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::contract(format!(
                "sparse indices must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&last) = indices.last() {
            if last as usize >= dim {
                return Err(Error::contract(format!("index {last} out of range for dimension {dim}")));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v == 0.0) {
            return Err(Error::contract(format!("sparse values must be finite and nonzero, got {v}")));
        }
        Ok(SparseVector { dim, indices, values })
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_sorted_unchecked(dim: usize, indices: Vec<u32>, values: Vec<f64>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.last().is_none_or(|&i| (i as usize) < dim));
        SparseVector { dim, indices, values }
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    /// Dot product, accumulated over shared indices in increasing order.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i as usize] = v;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SparseVector::new(3, vec![(0, 1.0), (2, 2.0)]).is_ok());
        assert!(SparseVector::new(3, vec![(2, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::new(3, vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::new(3, vec![(3, 1.0)]).is_err());
        assert!(SparseVector::new(3, vec![(0, f64::NAN)]).is_err());
        assert!(SparseVector::new(3, vec![(0, 0.0)]).is_err());
    }

    #[test]
    fn dot_and_norm() {
        let a = SparseVector::new(5, vec![(0, 1.0), (2, 2.0), (4, 3.0)]).unwrap();
        let b = SparseVector::new(5, vec![(1, 5.0), (2, 4.0), (4, -1.0)]).unwrap();
        assert_eq!(a.dot(&b), 5.0);
        assert_eq!(a.norm(), 14f64.sqrt());
        assert_eq!(a.to_dense(), vec![1.0, 0.0, 2.0, 0.0, 3.0]);
        assert_eq!(b.get(1), 5.0);
        assert_eq!(b.get(0), 0.0);
    }
}
