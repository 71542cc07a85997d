//! Independent oracles and fixtures shared by the integration tests.

#![allow(dead_code)]

use evlink::vectorspace::SparseVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense SVD by one-sided (Hestenes) Jacobi rotations.
pub struct DenseSvd {
    /// Non-increasing.
    pub singular_values: Vec<f64>,
    /// Right singular vectors, one per singular value, each of length n.
    pub v: Vec<Vec<f64>>,
    /// Left singular vectors, one per singular value, each of length m.
    pub u: Vec<Vec<f64>>,
}

/// `rows` is an m x n matrix given row by row.
pub fn jacobi_svd(rows: &[Vec<f64>]) -> DenseSvd {
    let m = rows.len();
    let n = rows[0].len();
    if m < n {
        let transposed: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        let t = jacobi_svd(&transposed);
        return DenseSvd {
            singular_values: t.singular_values,
            v: t.u,
            u: t.v,
        };
    }
    // Columns of the working matrix and of V.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| f64::from(u8::from(i == j))).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut cols, &mut v] {
                    let (left, right) = mat.split_at_mut(q);
                    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        let (a, b) = (*x, *y);
                        *x = c * a - s * b;
                        *y = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (dot(c, c).sqrt(), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    DenseSvd {
        singular_values: order.iter().map(|o| o.0).collect(),
        u: order
            .iter()
            .map(|&(s, j)| cols[j].iter().map(|x| if s > 0.0 { x / s } else { 0.0 }).collect())
            .collect(),
        v: order.iter().map(|&(_, j)| v[j].clone()).collect(),
    }
}

/// Longest common substring by the classic O(nm) dynamic programme.
pub fn lcs_dp(a: &[char], b: &[char]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut best = 0;
    for &ca in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, &cb) in b.iter().enumerate() {
            if ca == cb {
                cur[j + 1] = prev[j] + 1;
                best = best.max(cur[j + 1]);
            }
        }
        prev = cur;
    }
    best
}

/// Lowercase and collapse whitespace, as the dedup stage compares texts.
pub fn normalized_chars(text: &str) -> Vec<char> {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
        .chars()
        .collect()
}

/// Random sparse matrix with roughly `density` non-zeros, values in [-2, 2).
pub fn random_sparse(m: usize, n: usize, density: f64, seed: u64) -> (Vec<SparseVector>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dense: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(density) { rng.gen_range(-2.0..2.0) } else { 0.0 })
                .collect()
        })
        .collect();
    (to_sparse(&dense), dense)
}

pub fn to_sparse(dense: &[Vec<f64>]) -> Vec<SparseVector> {
    dense
        .iter()
        .map(|r| {
            let entries = r
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i as u32, *v))
                .collect();
            SparseVector::new(r.len(), entries).unwrap()
        })
        .collect()
}

/// Quantile of type 7 (Hyndman and Fan) from its one-based definition.
pub fn quantile_type7(values: &[usize], p: f64) -> f64 {
    let mut x: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let h = (n - 1.0) * p + 1.0;
    let lower = h.floor();
    let i = lower as usize;
    let xl = x[i - 1];
    let xu = x[i.min(x.len() - 1)];
    xl + (h - lower) * (xu - xl)
}
