//! Shared vocabulary and binary / TF / TF-IDF sparse document vectors.

mod io;
mod sparse;
mod vocab;

pub use io::{
    decode_sparse_vectors, encode_sparse_vectors, parse_vocab_tsv, vocab_meta, write_sparse_jsonl, write_vocab_tsv,
    VocabularyMeta, SPARSE_MAGIC,
};
pub use sparse::SparseVector;
pub use vocab::{
    build_vocabulary, tfidf_weight, vectorize, vectorize_corpus, vectorize_tokens, IdfVariant, Vocabulary,
    WeightingScheme, DEFAULT_MAX_DF,
};
