//! Exhaustive cosine ranking of candidate articles for webpage queries.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::vectorspace::SparseVector;

pub const DEFAULT_TOP_K: usize = 50;

/// Dense pools are scored this many rows at a time.
const DENSE_BLOCK_ROWS: usize = 256;

/// Cosine similarity of two dense vectors; `−∞` when either norm is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::contract(format!("cosine of vectors with dimensions {} and {}", u.len(), v.len())));
    }
    Ok(similarity(dense_dot(u, v), dense_norm(u), dense_norm(v)))
}

/// Cosine similarity of two sparse vectors; `−∞` when either norm is zero.
pub fn cosine_sparse(u: &SparseVector, v: &SparseVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::contract(format!("cosine of vectors with dimensions {} and {}", u.dim(), v.dim())));
    }
    Ok(similarity(u.dot(v), u.norm(), v.norm()))
}

fn similarity(dot: f64, norm_u: f64, norm_v: f64) -> f64 {
    if norm_u == 0.0 || norm_v == 0.0 {
        f64::NEG_INFINITY
    } else {
        dot / (norm_u * norm_v)
    }
}

fn dense_dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn dense_norm(u: &[f64]) -> f64 {
    dense_dot(u, u).sqrt()
}

/// Similarities are compared after rounding to 12 decimal digits.
pub fn rounded_similarity(sim: f64) -> f64 {
    if sim.is_finite() {
        (sim * 1e12).round() / 1e12
    } else {
        sim
    }
}

/// A query vector in either representation.
#[derive(Debug, Clone, Copy)]
pub enum VectorRef<'a> {
    Sparse(&'a SparseVector),
    Dense(&'a [f64]),
}

/// One webpage to rank against the pool.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub id: &'a str,
    pub true_id: &'a str,
    pub vector: VectorRef<'a>,
}

#[derive(Debug, Clone)]
enum PoolVectors {
    Sparse(InvertedIndex),
    Dense(EmbeddingMatrix),
}

/// Term-major copy of a sparse pool. Postings list rows in increasing order,
/// and queries visit terms in increasing order, so each accumulated dot
/// product sums its terms in the same order as [`SparseVector::dot`].
#[derive(Debug, Clone)]
struct InvertedIndex {
    dim: usize,
    offsets: Vec<usize>,
    rows: Vec<u32>,
    values: Vec<f64>,
}

impl InvertedIndex {
    fn new(dim: usize, vectors: &[SparseVector]) -> Self {
        let mut counts = vec![0usize; dim + 1];
        for v in vectors {
            for &t in v.indices() {
                counts[t as usize + 1] += 1;
            }
        }
        for t in 0..dim {
            counts[t + 1] += counts[t];
        }
        let nnz = counts[dim];
        let mut cursor = counts.clone();
        let mut rows = vec![0u32; nnz];
        let mut values = vec![0.0; nnz];
        for (r, v) in vectors.iter().enumerate() {
            for (t, x) in v.iter() {
                let slot = &mut cursor[t as usize];
                rows[*slot] = r as u32;
                values[*slot] = x;
                *slot += 1;
            }
        }
        InvertedIndex {
            dim,
            offsets: counts,
            rows,
            values,
        }
    }

    fn dots(&self, query: &SparseVector, n_rows: usize) -> Vec<f64> {
        let mut acc = vec![0.0; n_rows];
        for (t, q) in query.iter() {
            let span = self.offsets[t as usize]..self.offsets[t as usize + 1];
            for (&r, &x) in self.rows[span.clone()].iter().zip(&self.values[span]) {
                acc[r as usize] += q * x;
            }
        }
        acc
    }
}

/// The candidate articles of an evaluation, in one representation.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    ids: Vec<String>,
    positions: HashMap<String, usize>,
    vectors: PoolVectors,
    norms: Vec<f64>,
    representation_tag: String,
}

impl CandidatePool {
    pub fn sparse(ids: Vec<String>, vectors: &[SparseVector], representation_tag: impl Into<String>) -> Result<Self> {
        let dim = vectors.first().map_or(0, SparseVector::dim);
        if vectors.iter().any(|v| v.dim() != dim) {
            return Err(Error::contract("pool vectors differ in dimension"));
        }
        let norms = vectors.iter().map(SparseVector::norm).collect();
        Self::build(
            ids,
            vectors.len(),
            PoolVectors::Sparse(InvertedIndex::new(dim, vectors)),
            norms,
            representation_tag.into(),
        )
    }

    pub fn dense(ids: Vec<String>, vectors: EmbeddingMatrix, representation_tag: impl Into<String>) -> Result<Self> {
        let norms = vectors.rows().map(dense_norm).collect();
        Self::build(ids, vectors.n_rows(), PoolVectors::Dense(vectors), norms, representation_tag.into())
    }

    fn build(
        ids: Vec<String>,
        n_rows: usize,
        vectors: PoolVectors,
        norms: Vec<f64>,
        representation_tag: String,
    ) -> Result<Self> {
        if ids.len() != n_rows {
            return Err(Error::contract(format!("{} ids for {n_rows} pool vectors", ids.len())));
        }
        let mut positions = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if positions.insert(id.clone(), i).is_some() {
                return Err(Error::contract(format!("duplicate pool id {id}")));
            }
        }
        Ok(CandidatePool {
            ids,
            positions,
            vectors,
            norms,
            representation_tag,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        match &self.vectors {
            PoolVectors::Sparse(index) => index.dim,
            PoolVectors::Dense(m) => m.dim(),
        }
    }

    pub fn representation_tag(&self) -> &str {
        &self.representation_tag
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    /// Rounded cosine similarity of the query to every candidate, in pool order.
    pub fn similarities(&self, query: VectorRef<'_>) -> Result<Vec<f64>> {
        let (dots, query_norm) = match (&self.vectors, query) {
            (PoolVectors::Sparse(index), VectorRef::Sparse(q)) => {
                self.check_dim(q.dim())?;
                (index.dots(q, self.len()), q.norm())
            }
            (PoolVectors::Dense(m), VectorRef::Dense(q)) => {
                self.check_dim(q.len())?;
                let mut dots = Vec::with_capacity(m.n_rows());
                if m.dim() == 0 {
                    dots.resize(m.n_rows(), 0.0);
                } else {
                    for block in m.values().chunks(DENSE_BLOCK_ROWS * m.dim()) {
                        dots.extend(block.chunks_exact(m.dim()).map(|row| dense_dot(q, row)));
                    }
                }
                (dots, dense_norm(q))
            }
            _ => {
                return Err(Error::contract(format!(
                    "query representation does not match the {} pool",
                    self.representation_tag
                )))
            }
        };
        Ok(dots
            .into_iter()
            .zip(&self.norms)
            .map(|(dot, &norm)| rounded_similarity(similarity(dot, query_norm, norm)))
            .collect())
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::contract(format!(
                "query dimension {dim} does not match pool dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Outcome of ranking one query against the whole pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankedResult {
    pub query_id: String,
    pub true_id: String,
    pub true_rank: usize,
    pub pool_size: usize,
    #[serde(with = "topk_serde")]
    pub topk: Vec<(String, f64)>,
}

/// Pessimistic rank of the true article plus the top `k` candidates.
pub fn rank_candidates(query: &Query<'_>, pool: &CandidatePool, k: usize) -> Result<RankedResult> {
    let true_pos = pool
        .position(query.true_id)
        .ok_or_else(|| Error::contract(format!("true article {} is not in the pool", query.true_id)))?;
    let sims = pool.similarities(query.vector)?;
    let true_sim = sims[true_pos];
    let at_or_above = sims
        .iter()
        .enumerate()
        .filter(|&(i, s)| i != true_pos && s.total_cmp(&true_sim) != Ordering::Less)
        .count();
    Ok(RankedResult {
        query_id: query.id.to_string(),
        true_id: query.true_id.to_string(),
        true_rank: 1 + at_or_above,
        pool_size: pool.len(),
        topk: top_k(&sims, pool.ids(), k),
    })
}

fn top_k(sims: &[f64], ids: &[String], k: usize) -> Vec<(String, f64)> {
    let order = |&a: &usize, &b: &usize| sims[b].total_cmp(&sims[a]).then_with(|| ids[a].cmp(&ids[b]));
    let mut idx: Vec<usize> = (0..sims.len()).collect();
    let k = k.min(idx.len());
    if k == 0 {
        return Vec::new();
    }
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, order);
        idx.truncate(k);
    }
    idx.sort_unstable_by(order);
    idx.into_iter().map(|i| (ids[i].clone(), sims[i])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Serial,
}

/// Rank every query; results keep the input order.
pub fn rank_all(queries: &[Query<'_>], pool: &CandidatePool, k: usize) -> Result<Vec<RankedResult>> {
    rank_all_with(queries, pool, k, Execution::Parallel)
}

pub fn rank_all_with(
    queries: &[Query<'_>],
    pool: &CandidatePool,
    k: usize,
    execution: Execution,
) -> Result<Vec<RankedResult>> {
    match execution {
        Execution::Parallel => queries.par_iter().map(|q| rank_candidates(q, pool, k)).collect(),
        Execution::Serial => queries.iter().map(|q| rank_candidates(q, pool, k)).collect(),
    }
}

/// Write one JSON object per result. Similarities of `−∞` become `null`.
pub fn write_rankings_jsonl<W: Write>(mut out: W, results: &[RankedResult]) -> Result<()> {
    for r in results {
        let line = serde_json::to_string(r).map_err(|e| Error::Json {
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(out, "{line}").map_err(|e| Error::io("<rankings>", e))?;
    }
    Ok(())
}

pub fn parse_rankings_jsonl<R: BufRead>(input: R) -> Result<Vec<RankedResult>> {
    let mut results = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<rankings>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: RankedResult = serde_json::from_str(&line).map_err(|e| Error::Json {
            line: n + 1,
            message: e.to_string(),
        })?;
        if r.true_rank == 0 || r.true_rank > r.pool_size {
            return Err(Error::Json {
                line: n + 1,
                message: format!("true_rank {} outside 1..={}", r.true_rank, r.pool_size),
            });
        }
        if r.topk.windows(2).any(|w| w[0].1 < w[1].1) {
            return Err(Error::Json {
                line: n + 1,
                message: "topk similarities increase".into(),
            });
        }
        results.push(r);
    }
    Ok(results)
}

mod topk_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(topk: &[(String, f64)], s: S) -> Result<S::Ok, S::Error> {
        topk.iter()
            .map(|(id, sim)| (id, sim.is_finite().then_some(*sim)))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(String, f64)>, D::Error> {
        let raw = Vec::<(String, Option<f64>)>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|(id, sim)| (id, sim.unwrap_or(f64::NEG_INFINITY)))
            .collect())
    }
}
