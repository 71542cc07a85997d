//! Vocabulary and sparse-vector persistence.
//!
//! `vocab.tsv` holds `term<TAB>index<TAB>doc_freq` lines with companion
//! `vocab.meta.json`. Sparse vector sets use the little-endian `EVSP1`
//! layout:
//!
//! ```text
//! "EVSP1" | n_rows: u64 | dim: u64 | rows...
//! row = nnz: u64 | indices: [u32; nnz] | values: [f64; nnz]
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::sparse::SparseVector;
use super::vocab::{IdfVariant, Vocabulary};
use crate::binfmt::{ByteReader, ByteWriter};
use crate::error::{Error, Result};

pub const SPARSE_MAGIC: &[u8; 5] = b"EVSP1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyMeta {
    pub n_docs: u64,
    pub max_df: f64,
    pub idf_variant: IdfVariant,
}

pub fn write_vocab_tsv<W: Write>(mut out: W, vocab: &Vocabulary) -> std::io::Result<()> {
    for (i, term) in vocab.terms().iter().enumerate() {
        writeln!(out, "{term}\t{i}\t{}", vocab.doc_freq(i as u32))?;
    }
    Ok(())
}

pub fn vocab_meta(vocab: &Vocabulary) -> VocabularyMeta {
    VocabularyMeta {
        n_docs: vocab.n_docs(),
        max_df: vocab.max_df(),
        idf_variant: vocab.idf_variant(),
    }
}

/// Parse `vocab.tsv`; indices must be dense and follow sorted term order.
pub fn parse_vocab_tsv(input: impl BufRead, meta: &VocabularyMeta) -> Result<Vocabulary> {
    let bad = |line: usize, msg: &str| Error::format("vocab.tsv", format!("line {line}: {msg}"));
    let mut terms: Vec<(String, u64)> = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| bad(n + 1, &e.to_string()))?;
        let mut fields = line.split('\t');
        let (Some(term), Some(index), Some(df), None) = (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad(n + 1, "expected three tab-separated fields"));
        };
        let index: usize = index.parse().map_err(|_| bad(n + 1, "index is not an integer"))?;
        let df: u64 = df.parse().map_err(|_| bad(n + 1, "doc_freq is not an integer"))?;
        if index != terms.len() {
            return Err(bad(n + 1, "indices must be dense and in order"));
        }
        if term.is_empty() {
            return Err(bad(n + 1, "empty term"));
        }
        if let Some((prev, _)) = terms.last() {
            if prev.as_str() >= term {
                return Err(bad(n + 1, "terms must be strictly sorted"));
            }
        }
        terms.push((term.to_string(), df));
    }
    Vocabulary::from_parts(terms, meta.n_docs, meta.max_df, meta.idf_variant)
        .map_err(|e| Error::format("vocab.tsv", e.to_string()))
}

pub fn encode_sparse_vectors(rows: &[SparseVector], dim: usize) -> Result<Vec<u8>> {
    let mut w = ByteWriter::with_magic(SPARSE_MAGIC);
    w.u64(rows.len() as u64);
    w.u64(dim as u64);
    for row in rows {
        if row.dim() != dim {
            return Err(Error::contract(format!(
                "row dimension {} differs from set dimension {dim}",
                row.dim()
            )));
        }
        w.u64(row.nnz() as u64);
        for &i in row.indices() {
            w.u32(i);
        }
        for &v in row.values() {
            w.f64(v);
        }
    }
    Ok(w.into_inner())
}

/// Decode an `EVSP1` buffer into `(dim, rows)`.
pub fn decode_sparse_vectors(bytes: &[u8]) -> Result<(usize, Vec<SparseVector>)> {
    let mut r = ByteReader::new("EVSP1", bytes);
    r.magic(SPARSE_MAGIC)?;
    let n_rows = r.len_u64()?;
    let dim = r.len_u64()?;
    if dim > u32::MAX as usize + 1 {
        return Err(r.error("dimension exceeds u32 index range"));
    }
    // Each row needs at least its 8-byte nnz header.
    r.ensure_items(n_rows, 8)?;
    let mut rows = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let nnz = r.len_u64()?;
        if nnz > dim {
            return Err(r.error("row has more entries than the dimension"));
        }
        r.ensure_items(nnz, 12)?;
        let indices = (0..nnz).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let values = (0..nnz).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let row = SparseVector::from_parts(dim, indices, values).map_err(|e| r.error(&e.to_string()))?;
        rows.push(row);
    }
    r.finish()?;
    Ok((dim, rows))
}

#[derive(Serialize)]
struct DebugRow<'a> {
    row: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a str>,
    dim: usize,
    entries: Vec<(u32, f64)>,
}

/// Human-readable JSONL dump: one `{"row","id","dim","entries"}` object per line.
pub fn write_sparse_jsonl<W: Write>(mut out: W, rows: &[SparseVector], ids: Option<&[String]>) -> std::io::Result<()> {
    for (i, row) in rows.iter().enumerate() {
        let rec = DebugRow {
            row: i,
            id: ids.and_then(|ids| ids.get(i)).map(String::as_str),
            dim: row.dim(),
            entries: row.iter().collect(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vocab_round_trip() {
        let vocab = Vocabulary::from_parts(
            vec![("beta".into(), 3), ("alpha".into(), 1)],
            4,
            0.85,
            IdfVariant::Smooth,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_vocab_tsv(&mut buf, &vocab).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "alpha\t0\t1\nbeta\t1\t3\n");
        let back = parse_vocab_tsv(buf.as_slice(), &vocab_meta(&vocab)).unwrap();
        assert_eq!(back, vocab);
    }

    #[test]
    fn vocab_rejects_gaps_and_disorder() {
        let meta = VocabularyMeta {
            n_docs: 4,
            max_df: 1.0,
            idf_variant: IdfVariant::Smooth,
        };
        assert!(parse_vocab_tsv("a\t1\t1\n".as_bytes(), &meta).is_err());
        assert!(parse_vocab_tsv("b\t0\t1\na\t1\t1\n".as_bytes(), &meta).is_err());
        assert!(parse_vocab_tsv("a\t0\t9\n".as_bytes(), &meta).is_err());
        assert!(parse_vocab_tsv("a\t0\n".as_bytes(), &meta).is_err());
    }

    #[test]
    fn sparse_layout_is_little_endian() {
        let rows = vec![SparseVector::new(3, vec![(2, 1.5)]).unwrap()];
        let bytes = encode_sparse_vectors(&rows, 3).unwrap();
        let mut expected = b"EVSP1".to_vec();
        expected.extend(1u64.to_le_bytes());
        expected.extend(3u64.to_le_bytes());
        expected.extend(1u64.to_le_bytes());
        expected.extend(2u32.to_le_bytes());
        expected.extend(1.5f64.to_le_bytes());
        assert_eq!(bytes, expected);
    }

    #[test]
    fn sparse_decoder_rejects_garbage() {
        assert!(decode_sparse_vectors(b"").is_err());
        assert!(decode_sparse_vectors(b"EVSP2").is_err());
        let mut huge = b"EVSP1".to_vec();
        huge.extend(u64::MAX.to_le_bytes());
        huge.extend(10u64.to_le_bytes());
        assert!(decode_sparse_vectors(&huge).is_err());
        let rows = vec![SparseVector::new(3, vec![(2, 1.5)]).unwrap()];
        let mut bytes = encode_sparse_vectors(&rows, 3).unwrap();
        bytes.push(0);
        assert!(decode_sparse_vectors(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn sparse_round_trip(rows in proptest::collection::vec(
            proptest::collection::btree_map(0u32..50, -1e6f64..1e6, 0..10), 0..10)) {
            let rows: Vec<SparseVector> = rows
                .into_iter()
                .map(|m| SparseVector::new(50, m.into_iter().filter(|(_, v)| *v != 0.0).collect()).unwrap())
                .collect();
            let bytes = encode_sparse_vectors(&rows, 50).unwrap();
            let (dim, back) = decode_sparse_vectors(&bytes).unwrap();
            prop_assert_eq!(dim, 50);
            prop_assert_eq!(back, rows);
        }
    }
}
