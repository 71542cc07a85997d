//! Randomized truncated SVD over sparse document–term matrices.

mod csr;
mod embedding;
mod io;
mod tsvd;

pub use embedding::EmbeddingMatrix;
pub use io::{decode_tsvd, encode_tsvd, TSVD_MAGIC};
pub use tsvd::{
    fit_tsvd, fit_tsvd_with, project, TsvdModel, TsvdParams, DEFAULT_OVERSAMPLING, DEFAULT_POWER_ITERATIONS,
};
