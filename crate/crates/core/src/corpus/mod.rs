//! Corpus ingestion: import, clean, filter, deduplicate, link and split.

mod dedup;
mod document;
mod html;
mod language;
mod lcs;
mod links;
mod manifest;
mod pubmed;
mod split;

pub use dedup::{dedup_webpages, DedupOutcome, DedupParams, Representative, DEFAULT_DEDUP_FRACTION, DEFAULT_RESIDUAL_OVERLAP};
pub use document::{parse_documents_jsonl, tokenize, write_documents_jsonl, Document, DocumentKind};
pub use html::extract_webpage_text;
pub use language::{function_word_ratio, is_probably_english, ENGLISH_FUNCTION_WORD_RATIO};
pub use lcs::{lcs_length, normalize};
pub use links::{is_one_to_one, parse_links_csv, resolve_one_to_one, write_links_csv, KnownLink, RawLink};
pub use manifest::{
    build_manifest, CorpusManifest, FilterParams, IngestParams, IngestReport, ManifestCounts, DEFAULT_TRAIN_FRACTION,
    MIN_WORDS,
};
pub(crate) use language::FUNCTION_WORDS;
pub(crate) use manifest::index_by_id;
pub use pubmed::{import_pubmed_xml, parse_pubmed_xml, PubmedImport};
pub use split::{parse_split_csv, split_links, write_split_csv, Partition, Split};
