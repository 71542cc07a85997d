//! `tsvd.bin`: little-endian
//! `"EVTS1" | k: u64 | dim: u64 | seed: u64 | n_iter: u64 | singular values: [f64; k] | components: [f64; k*dim]`.

use super::tsvd::TsvdModel;
use crate::binfmt::{ByteReader, ByteWriter};
use crate::error::Result;

pub const TSVD_MAGIC: &[u8; 5] = b"EVTS1";

pub fn encode_tsvd(model: &TsvdModel) -> Vec<u8> {
    let mut w = ByteWriter::with_magic(TSVD_MAGIC);
    w.u64(model.k() as u64);
    w.u64(model.dim() as u64);
    w.u64(model.seed());
    w.u64(model.n_iter() as u64);
    w.f64s(model.singular_values());
    w.f64s(model.components());
    w.into_inner()
}

pub fn decode_tsvd(bytes: &[u8]) -> Result<TsvdModel> {
    let mut r = ByteReader::new("EVTS1", bytes);
    r.magic(TSVD_MAGIC)?;
    let k = r.len_u64()?;
    let dim = r.len_u64()?;
    let seed = r.u64()?;
    let n_iter = r.len_u64()?;
    let singular_values = r.f64s(k)?;
    let total = k.checked_mul(dim).ok_or_else(|| r.error("k x dim overflows"))?;
    let components = r.f64s(total)?;
    r.finish()?;
    TsvdModel::from_parts(dim, seed, n_iter, singular_values, components)
        .map_err(|e| crate::Error::format("EVTS1", e.to_string()))
}
