use std::cmp::Ordering;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::csr::CsrMatrix;
use super::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::vectorspace::SparseVector;

pub const DEFAULT_OVERSAMPLING: usize = 10;
pub const DEFAULT_POWER_ITERATIONS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TsvdParams {
    pub k: usize,
    pub oversampling: usize,
    pub n_iter: usize,
    pub seed: u64,
}

impl TsvdParams {
    pub fn new(k: usize, seed: u64) -> Self {
        TsvdParams {
            k,
            oversampling: DEFAULT_OVERSAMPLING,
            n_iter: DEFAULT_POWER_ITERATIONS,
            seed,
        }
    }

    pub fn with_n_iter(mut self, n_iter: usize) -> Self {
        self.n_iter = n_iter;
        self
    }
}

/// A fitted rank-`k` latent space: orthonormal right singular vectors over
/// the vocabulary and their singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct TsvdModel {
    k: usize,
    dim: usize,
    seed: u64,
    n_iter: usize,
    singular_values: Vec<f64>,
    /// k x dim, row-major.
    components: Vec<f64>,
    /// dim x k, row-major; the layout projection reads.
    components_t: Vec<f64>,
}

impl TsvdModel {
    pub(crate) fn from_parts(
        dim: usize,
        seed: u64,
        n_iter: usize,
        singular_values: Vec<f64>,
        components: Vec<f64>,
    ) -> Result<Self> {
        let k = singular_values.len();
        if components.len() != k * dim {
            return Err(Error::contract("component matrix does not match k x dim"));
        }
        if singular_values.iter().any(|s| !s.is_finite() || *s < 0.0)
            || singular_values.windows(2).any(|w| w[0] < w[1])
        {
            return Err(Error::contract("singular values must be finite, non-negative and non-increasing"));
        }
        if components.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("components must be finite"));
        }
        let mut components_t = vec![0.0; k * dim];
        for j in 0..k {
            for t in 0..dim {
                components_t[t * k + j] = components[j * dim + t];
            }
        }
        Ok(TsvdModel {
            k,
            dim,
            seed,
            n_iter,
            singular_values,
            components,
            components_t,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_iter(&self) -> usize {
        self.n_iter
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Row `j` of the component basis, length `dim`.
    pub fn component(&self, j: usize) -> &[f64] {
        &self.components[j * self.dim..(j + 1) * self.dim]
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Share of `‖A‖²_F` captured by the components.
    pub fn explained_variance_ratio(&self, rows: &[SparseVector]) -> Result<f64> {
        let total: f64 = rows.iter().map(|r| r.values().iter().map(|v| v * v).sum::<f64>()).sum();
        if total == 0.0 {
            return Err(Error::Degenerate("matrix is all zeros".into()));
        }
        let captured: f64 = self.singular_values.iter().map(|s| s * s).sum();
        Ok((captured / total).min(1.0))
    }

    /// `‖A − A Vᵀ V‖_F`, computed row by row without cancellation-prone
    /// norm differences.
    pub fn reconstruction_error(&self, rows: &[SparseVector]) -> Result<f64> {
        let coords = project(self, rows)?;
        let sq: f64 = rows
            .par_iter()
            .enumerate()
            .map(|(i, row)| {
                let mut residual = row.to_dense();
                for (j, c) in coords.row(i).iter().enumerate() {
                    for (r, v) in residual.iter_mut().zip(self.component(j)) {
                        *r -= c * v;
                    }
                }
                residual.iter().map(|r| r * r).sum::<f64>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        Ok(sq.sqrt())
    }
}

/// Randomized truncated SVD with the default oversampling.
pub fn fit_tsvd(matrix: &[SparseVector], k: usize, seed: u64, n_iter: usize) -> Result<TsvdModel> {
    fit_tsvd_with(matrix, TsvdParams::new(k, seed).with_n_iter(n_iter))
}

/// Randomized range finding with subspace (power) iteration, followed by an
/// exact SVD of the small projected matrix.
pub fn fit_tsvd_with(matrix: &[SparseVector], params: TsvdParams) -> Result<TsvdModel> {
    if matrix.is_empty() {
        return Err(Error::contract("cannot fit T-SVD on an empty matrix"));
    }
    let a = CsrMatrix::from_rows(matrix)?;
    let (m, n) = (a.n_rows(), a.n_cols());
    let max_k = m.min(n);
    if params.k == 0 || params.k > max_k {
        return Err(Error::contract(format!(
            "k = {} outside 1..={max_k} for a {m}x{n} matrix",
            params.k
        )));
    }
    if a.frobenius_sq() == 0.0 {
        return Err(Error::Degenerate("matrix is all zeros".into()));
    }
    let at = a.transpose();
    let width = (params.k + params.oversampling).min(max_k);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let omega = DMatrix::<f64>::from_fn(n, width, |_, _| StandardNormal.sample(&mut rng));

    let mut q = orthonormalize(a.mul_dense(&omega));
    for _ in 0..params.n_iter {
        let z = orthonormalize(at.mul_dense(&q));
        q = orthonormalize(a.mul_dense(&z));
    }

    // Bᵀ = Aᵀ Q is n x width; its left singular vectors are B's right ones.
    let bt = at.mul_dense(&q);
    let svd = bt.svd(true, false);
    let u = svd.u.expect("requested left singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });

    let mut singular_values = Vec::with_capacity(params.k);
    let mut components = Vec::with_capacity(params.k * n);
    for &col in order.iter().take(params.k) {
        singular_values.push(svd.singular_values[col].max(0.0));
        let mut v: Vec<f64> = u.column(col).iter().copied().collect();
        // Sign convention: largest-magnitude entry positive.
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.extend(v);
    }
    TsvdModel::from_parts(n, params.seed, params.n_iter, singular_values, components)
}

fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Coordinates of each vector in the model's latent space.
pub fn project(model: &TsvdModel, vectors: &[SparseVector]) -> Result<EmbeddingMatrix> {
    if let Some(v) = vectors.iter().find(|v| v.dim() != model.dim) {
        return Err(Error::contract(format!(
            "vector dimension {} does not match model dimension {}",
            v.dim(),
            model.dim
        )));
    }
    let k = model.k;
    let mut out = vec![0.0; vectors.len() * k];
    if k > 0 {
        out.par_chunks_mut(k).zip(vectors.par_iter()).for_each(|(acc, v)| {
            for (t, x) in v.iter() {
                let basis = &model.components_t[t as usize * k..][..k];
                for (a, b) in acc.iter_mut().zip(basis) {
                    *a += x * b;
                }
            }
        });
    }
    Ok(EmbeddingMatrix::from_raw(vectors.len(), k, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_rows(rows: &[&[f64]]) -> Vec<SparseVector> {
        rows.iter()
            .map(|r| {
                SparseVector::new(
                    r.len(),
                    r.iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(i, v)| (i as u32, *v))
                        .collect(),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn diagonal_matrix() {
        let rows = dense_rows(&[&[3.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]);
        let model = fit_tsvd(&rows, 2, 0, 7).unwrap();
        assert!((model.singular_values()[0] - 3.0).abs() < 1e-12);
        assert!((model.singular_values()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_matrix() {
        let u = [1.0, -2.0, 0.5, 3.0];
        let v = [0.0, 1.0, 2.0, 0.0, -1.0];
        let data: Vec<Vec<f64>> = u.iter().map(|a| v.iter().map(|b| a * b).collect()).collect();
        let refs: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let rows = dense_rows(&refs);
        let frob: f64 = data.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        let model = fit_tsvd(&rows, 1, 5, 7).unwrap();
        assert!((model.singular_values()[0] - frob).abs() < 1e-12);
        assert!(model.reconstruction_error(&rows).unwrap() < 1e-10);
        assert!((model.explained_variance_ratio(&rows).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn components_are_orthonormal_and_deterministic() {
        let rows: Vec<SparseVector> = (0..30)
            .map(|i| {
                let entries = (0..40u32)
                    .filter(|j| (i * 7 + *j as usize * 3) % 5 == 0)
                    .map(|j| (j, 1.0 + ((i as u32 + j) % 4) as f64))
                    .collect();
                SparseVector::new(40, entries).unwrap()
            })
            .collect();
        let a = fit_tsvd(&rows, 6, 42, 7).unwrap();
        let b = fit_tsvd(&rows, 6, 42, 7).unwrap();
        assert_eq!(a, b);
        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 = a.component(i).iter().zip(a.component(j)).map(|(x, y)| x * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-8, "<v{i}, v{j}> = {dot}");
            }
        }
        assert!(a.singular_values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn argument_errors() {
        let rows = dense_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(fit_tsvd(&rows, 0, 0, 7), Err(Error::Contract(_))));
        assert!(matches!(fit_tsvd(&rows, 3, 0, 7), Err(Error::Contract(_))));
        assert!(matches!(fit_tsvd(&[], 1, 0, 7), Err(Error::Contract(_))));
        let zeros = vec![SparseVector::zeros(2), SparseVector::zeros(2)];
        assert!(matches!(fit_tsvd(&zeros, 1, 0, 7), Err(Error::Degenerate(_))));
    }

    #[test]
    fn projection_edge_cases() {
        let rows = dense_rows(&[&[3.0, 1.0, 0.0], &[0.0, 2.0, 1.0], &[1.0, 0.0, 1.0]]);
        let model = fit_tsvd(&rows, 3, 1, 7).unwrap();
        let zero = project(&model, &[SparseVector::zeros(3)]).unwrap();
        assert!(zero.row(0).iter().all(|v| *v == 0.0));
        assert!(project(&model, &[SparseVector::zeros(4)]).is_err());

        // Full-rank orthonormal basis: projection is an isometry.
        let emb = project(&model, &rows).unwrap();
        let cos = |a: &[f64], b: &[f64]| {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            dot / (a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt())
        };
        for i in 0..3 {
            for j in 0..3 {
                let before = cos(&rows[i].to_dense(), &rows[j].to_dense());
                let after = cos(emb.row(i), emb.row(j));
                assert!((before - after).abs() < 1e-8);
            }
        }
        assert!(model.reconstruction_error(&rows).unwrap() < 1e-6);
    }
}
