//! Cross-corpus document linking: given the text of a webpage, rank the
//! research articles it most plausibly reports on.
//!
//! The pipeline is `corpus` (ingest and split) → `vectorspace` (binary, TF or
//! TF-IDF term vectors) → optional `decompose` (randomized truncated SVD) →
//! optional `align` (CCA between webpage and article spaces) → `ranker`
//! (exhaustive cosine ranking) → `harness` (metrics, grids, reports).

pub mod align;
mod binfmt;
pub mod corpus;
pub mod decompose;
pub mod error;
pub mod harness;
pub mod ranker;
pub mod vectorspace;

pub use error::{Error, Result};
