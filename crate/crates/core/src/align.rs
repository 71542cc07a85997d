//! Canonical correlation analysis between webpage-space and article-space
//! embeddings, solved deterministically by an SVD of the whitened
//! cross-covariance.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binfmt::{ByteReader, ByteWriter};
use crate::decompose::EmbeddingMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_CCA_EPSILON: f64 = 1e-3;
pub const CCA_MAGIC: &[u8; 5] = b"EVCC1";

/// Eigenvalues below this fraction of the largest are numerically zero.
const RANK_FLOOR: f64 = 1e-10;
const CORRELATION_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Webpage,
    Article,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Webpage => "webpage",
            Side::Article => "article",
        })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "webpage" => Ok(Side::Webpage),
            "article" => Ok(Side::Article),
            other => Err(Error::contract(format!("unknown side {other:?}"))),
        }
    }
}

/// Paired projections into a shared `d`-dimensional canonical space.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaModel {
    d: usize,
    epsilon: f64,
    correlations: Vec<f64>,
    webpage: SideProjection,
    article: SideProjection,
}

#[derive(Debug, Clone, PartialEq)]
struct SideProjection {
    dim: usize,
    mean: Vec<f64>,
    /// dim x d, row-major.
    weights: Vec<f64>,
}

impl CcaModel {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        d: usize,
        epsilon: f64,
        correlations: Vec<f64>,
        webpage_mean: Vec<f64>,
        webpage_weights: Vec<f64>,
        article_mean: Vec<f64>,
        article_weights: Vec<f64>,
    ) -> Result<Self> {
        if d == 0 || correlations.len() != d {
            return Err(Error::contract("correlation count must equal d >= 1"));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::contract("epsilon must be finite and non-negative"));
        }
        if correlations
            .iter()
            .any(|c| !(c.is_finite() && *c >= 0.0 && *c <= 1.0 + CORRELATION_SLACK))
            || correlations.windows(2).any(|w| w[0] < w[1])
        {
            return Err(Error::contract("correlations must lie in [0, 1] and be non-increasing"));
        }
        let side = |mean: Vec<f64>, weights: Vec<f64>| -> Result<SideProjection> {
            let dim = mean.len();
            if dim < d || weights.len() != dim * d {
                return Err(Error::contract("projection matrix does not match input_dim x d"));
            }
            if mean.iter().chain(&weights).any(|v| !v.is_finite()) {
                return Err(Error::contract("projection values must be finite"));
            }
            Ok(SideProjection { dim, mean, weights })
        };
        Ok(CcaModel {
            d,
            epsilon,
            correlations,
            webpage: side(webpage_mean, webpage_weights)?,
            article: side(article_mean, article_weights)?,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn correlations(&self) -> &[f64] {
        &self.correlations
    }

    pub fn input_dim(&self, side: Side) -> usize {
        self.side(side).dim
    }

    pub fn mean(&self, side: Side) -> &[f64] {
        &self.side(side).mean
    }

    /// Row-major `input_dim x d` projection matrix.
    pub fn weights(&self, side: Side) -> &[f64] {
        &self.side(side).weights
    }

    fn side(&self, side: Side) -> &SideProjection {
        match side {
            Side::Webpage => &self.webpage,
            Side::Article => &self.article,
        }
    }
}

/// Fit CCA on paired rows: row `i` of `webpages` links to row `i` of
/// `articles`.
///
/// The ridge added to each within-side covariance is `epsilon` times that
/// side's mean variance, so rescaling an input space does not change the
/// fitted directions.
pub fn fit_cca(webpages: &EmbeddingMatrix, articles: &EmbeddingMatrix, d: usize, epsilon: f64) -> Result<CcaModel> {
    let n = webpages.n_rows();
    if articles.n_rows() != n {
        return Err(Error::contract(format!(
            "paired inputs differ in row count ({n} webpages, {} articles)",
            articles.n_rows()
        )));
    }
    if d == 0 {
        return Err(Error::contract("d must be at least 1"));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::contract("epsilon must be finite and non-negative"));
    }
    let max_d = webpages.dim().min(articles.dim());
    if d > max_d {
        return Err(Error::contract(format!("d = {d} exceeds the smaller input dimension {max_d}")));
    }
    if n < 2 {
        return Err(Error::CcaNotConverged {
            requested: d,
            effective_rank: 0,
        });
    }

    let (xc, mean_x) = center(webpages);
    let (yc, mean_y) = center(articles);
    let scale = 1.0 / (n as f64 - 1.0);
    let cxx = xc.tr_mul(&xc) * scale;
    let cyy = yc.tr_mul(&yc) * scale;
    let cxy = xc.tr_mul(&yc) * scale;

    let wx = Whitener::new(cxx, epsilon);
    let wy = Whitener::new(cyy, epsilon);
    let effective_rank = wx.rank.min(wy.rank);
    if d > effective_rank {
        return Err(Error::CcaNotConverged { requested: d, effective_rank });
    }

    let t = &wx.inverse_sqrt * cxy * &wy.inverse_sqrt;
    let svd = t.svd(true, true);
    let u = svd.u.expect("requested left singular vectors");
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });

    let (dx, dy) = (webpages.dim(), articles.dim());
    let mut a = DMatrix::<f64>::zeros(dx, d);
    let mut b = DMatrix::<f64>::zeros(dy, d);
    let mut correlations = Vec::with_capacity(d);
    for (out, &col) in order.iter().take(d).enumerate() {
        let mut uc: DVector<f64> = u.column(col).into_owned();
        let mut vc: DVector<f64> = v_t.row(col).transpose();
        let pivot = uc.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            uc.neg_mut();
            vc.neg_mut();
        }
        a.set_column(out, &uc);
        b.set_column(out, &vc);
        correlations.push(svd.singular_values[col].clamp(0.0, 1.0 + CORRELATION_SLACK));
    }
    let w_x = &wx.inverse_sqrt * a;
    let w_y = &wy.inverse_sqrt * b;

    CcaModel::from_parts(
        d,
        epsilon,
        correlations,
        mean_x,
        row_major(&w_x),
        mean_y,
        row_major(&w_y),
    )
}

/// Canonical coordinates `(rows − mean) · W` for one side.
pub fn project_side(model: &CcaModel, side: Side, rows: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    let proj = model.side(side);
    if rows.dim() != proj.dim {
        return Err(Error::contract(format!(
            "{side} rows have dimension {} but the model expects {}",
            rows.dim(),
            proj.dim
        )));
    }
    let d = model.d;
    let mut out = vec![0.0; rows.n_rows() * d];
    out.par_chunks_mut(d).enumerate().for_each(|(i, acc)| {
        for ((x, m), w) in rows.row(i).iter().zip(&proj.mean).zip(proj.weights.chunks_exact(d)) {
            let centered = x - m;
            if centered != 0.0 {
                for (a, b) in acc.iter_mut().zip(w) {
                    *a += centered * b;
                }
            }
        }
    });
    EmbeddingMatrix::new(rows.n_rows(), d, out)
}

struct Whitener {
    inverse_sqrt: DMatrix<f64>,
    rank: usize,
}

impl Whitener {
    fn new(cov: DMatrix<f64>, epsilon: f64) -> Self {
        let p = cov.nrows();
        let mean_variance = cov.trace() / p as f64;
        let ridge = epsilon * mean_variance;
        let eig = SymmetricEigen::new(cov);
        let lambda_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
        let floor = lambda_max * RANK_FLOOR;
        let rank = eig.eigenvalues.iter().filter(|&&l| l > ridge.max(floor)).count();
        let scales = eig.eigenvalues.map(|l| {
            let reg = l.max(0.0) + ridge;
            if reg > floor && reg > 0.0 {
                1.0 / reg.sqrt()
            } else {
                0.0
            }
        });
        let v = eig.eigenvectors;
        let inverse_sqrt = &v * DMatrix::from_diagonal(&scales) * v.transpose();
        Whitener { inverse_sqrt, rank }
    }
}

fn center(m: &EmbeddingMatrix) -> (DMatrix<f64>, Vec<f64>) {
    let mut mat = m.to_dmatrix();
    let n = mat.nrows() as f64;
    let mut means = Vec::with_capacity(mat.ncols());
    for mut col in mat.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        means.push(mean);
    }
    (mat, means)
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// `cca.bin`: little-endian `"EVCC1" | d: u64 | webpage_dim: u64 |
/// article_dim: u64 | epsilon: f64 | webpage mean | article mean |
/// correlations | webpage W (row-major) | article W (row-major)`.
pub fn encode_cca(model: &CcaModel) -> Vec<u8> {
    let mut w = ByteWriter::with_magic(CCA_MAGIC);
    w.u64(model.d as u64);
    w.u64(model.webpage.dim as u64);
    w.u64(model.article.dim as u64);
    w.f64(model.epsilon);
    w.f64s(&model.webpage.mean);
    w.f64s(&model.article.mean);
    w.f64s(&model.correlations);
    w.f64s(&model.webpage.weights);
    w.f64s(&model.article.weights);
    w.into_inner()
}

pub fn decode_cca(bytes: &[u8]) -> Result<CcaModel> {
    let mut r = ByteReader::new("EVCC1", bytes);
    r.magic(CCA_MAGIC)?;
    let d = r.len_u64()?;
    let dx = r.len_u64()?;
    let dy = r.len_u64()?;
    let epsilon = r.f64()?;
    let mean_x = r.f64s(dx)?;
    let mean_y = r.f64s(dy)?;
    let correlations = r.f64s(d)?;
    let nx = dx.checked_mul(d).ok_or_else(|| r.error("webpage_dim x d overflows"))?;
    let w_x = r.f64s(nx)?;
    let ny = dy.checked_mul(d).ok_or_else(|| r.error("article_dim x d overflows"))?;
    let w_y = r.f64s(ny)?;
    r.finish()?;
    CcaModel::from_parts(d, epsilon, correlations, mean_x, w_x, mean_y, w_y)
        .map_err(|e| Error::format("EVCC1", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, dim: usize, seed: u64) -> EmbeddingMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        EmbeddingMatrix::new(n, dim, values).unwrap()
    }

    fn rotation(dim: usize, seed: u64) -> DMatrix<f64> {
        gaussian(dim, dim, seed).to_dmatrix().qr().q()
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
        cov / (va * vb).sqrt()
    }

    fn column(m: &EmbeddingMatrix, j: usize) -> Vec<f64> {
        m.rows().map(|r| r[j]).collect()
    }

    #[test]
    fn rotated_copy_is_perfectly_correlated() {
        let x = gaussian(500, 10, 1);
        let y = EmbeddingMatrix::from_dmatrix(&(x.to_dmatrix() * rotation(10, 2)));
        for d in 1..=5 {
            let model = fit_cca(&x, &y, d, DEFAULT_CCA_EPSILON).unwrap();
            assert!(model.correlations().iter().all(|c| *c >= 0.999), "{:?}", model.correlations());
        }
    }

    #[test]
    fn independent_samples_are_weakly_correlated() {
        let model = fit_cca(&gaussian(500, 10, 3), &gaussian(500, 10, 4), 3, DEFAULT_CCA_EPSILON).unwrap();
        assert!(model.correlations().iter().all(|c| *c < 0.3), "{:?}", model.correlations());
        assert!(model.correlations().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn fitted_correlations_match_projected_training_pairs() {
        let x = gaussian(300, 6, 5);
        let noise = gaussian(300, 5, 6);
        let mixed = x.to_dmatrix().columns(0, 5).into_owned() + noise.to_dmatrix() * 0.7;
        let y = EmbeddingMatrix::from_dmatrix(&mixed);
        let model = fit_cca(&x, &y, 4, 1e-12).unwrap();
        let px = project_side(&model, Side::Webpage, &x).unwrap();
        let py = project_side(&model, Side::Article, &y).unwrap();
        for j in 0..4 {
            let r = correlation(&column(&px, j), &column(&py, j));
            assert!((r - model.correlations()[j]).abs() < 1e-6, "{j}: {r} vs {}", model.correlations()[j]);
            for k in 0..j {
                assert!(correlation(&column(&px, j), &column(&px, k)).abs() < 1e-6);
                assert!(correlation(&column(&py, j), &column(&py, k)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn mean_row_projects_to_origin_and_constant_columns_stay_finite() {
        let mut rows: Vec<Vec<f64>> = gaussian(50, 4, 7).rows().map(<[f64]>::to_vec).collect();
        for r in &mut rows {
            r[2] = 5.0;
        }
        let x = EmbeddingMatrix::from_rows(&rows).unwrap();
        let y = gaussian(50, 3, 8);
        let model = fit_cca(&x, &y, 2, DEFAULT_CCA_EPSILON).unwrap();
        let mean = EmbeddingMatrix::new(1, 4, model.mean(Side::Webpage).to_vec()).unwrap();
        let p = project_side(&model, Side::Webpage, &mean).unwrap();
        assert!(p.values().iter().all(|v| *v == 0.0));
        let all = project_side(&model, Side::Webpage, &x).unwrap();
        assert!(all.values().iter().all(|v| v.is_finite()));
        assert!(project_side(&model, Side::Article, &x).is_err());
    }

    #[test]
    fn rank_deficiency_is_non_convergence() {
        let x = gaussian(8, 20, 9);
        let y = gaussian(8, 20, 10);
        match fit_cca(&x, &y, 10, DEFAULT_CCA_EPSILON) {
            Err(Error::CcaNotConverged { requested, effective_rank }) => {
                assert_eq!(requested, 10);
                assert!(effective_rank <= 7);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        assert!(matches!(fit_cca(&x, &y, 8, 1e-3), Err(Error::CcaNotConverged { .. })));
        assert!(fit_cca(&x, &y, 5, 1e-3).is_ok());
    }

    #[test]
    fn argument_errors() {
        let x = gaussian(10, 3, 1);
        assert!(matches!(fit_cca(&x, &gaussian(9, 3, 2), 1, 1e-3), Err(Error::Contract(_))));
        assert!(matches!(fit_cca(&x, &gaussian(10, 2, 2), 3, 1e-3), Err(Error::Contract(_))));
        assert!(matches!(fit_cca(&x, &x, 0, 1e-3), Err(Error::Contract(_))));
        assert!(matches!(fit_cca(&x, &x, 1, -1.0), Err(Error::Contract(_))));
    }

    #[test]
    fn scaling_an_input_scales_its_projection() {
        let x = gaussian(100, 5, 11);
        let y = gaussian(100, 4, 12);
        let base = fit_cca(&x, &y, 3, DEFAULT_CCA_EPSILON).unwrap();
        let scaled = fit_cca(&x.scaled(7.5), &y, 3, DEFAULT_CCA_EPSILON).unwrap();
        for (a, b) in base.correlations().iter().zip(scaled.correlations()) {
            assert!((a - b).abs() < 1e-10);
        }
        let pa = project_side(&base, Side::Webpage, &x).unwrap();
        let pb = project_side(&scaled, Side::Webpage, &x.scaled(7.5)).unwrap();
        for (a, b) in pa.values().iter().zip(pb.values()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn binary_round_trip() {
        let model = fit_cca(&gaussian(40, 4, 13), &gaussian(40, 3, 14), 2, 1e-3).unwrap();
        let bytes = encode_cca(&model);
        assert_eq!(&bytes[..5], b"EVCC1");
        assert_eq!(decode_cca(&bytes).unwrap(), model);
        assert!(decode_cca(&bytes[..bytes.len() - 3]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_cca(&extra).is_err());
        assert_eq!(fit_cca(&gaussian(40, 4, 13), &gaussian(40, 3, 14), 2, 1e-3).unwrap(), model);
    }
}
