use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the linking problem a document belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Article,
    Webpage,
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocumentKind::Article => "article",
            DocumentKind::Webpage => "webpage",
        })
    }
}

impl FromStr for DocumentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "article" => Ok(DocumentKind::Article),
            "webpage" => Ok(DocumentKind::Webpage),
            other => Err(Error::format("document", format!("unknown kind {other:?}"))),
        }
    }
}

/// One article or webpage. Tokens and word count are derived from the raw
/// text at construction and never change afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    id: String,
    kind: DocumentKind,
    raw_text: String,
    tokens: Vec<String>,
    word_count: usize,
}

impl Document {
    pub fn new(id: impl Into<String>, kind: DocumentKind, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let tokens = tokenize(&raw_text);
        let word_count = raw_text.split_whitespace().count();
        Document {
            id: id.into(),
            kind,
            raw_text,
            tokens,
            word_count,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> DocumentKind {
        self.kind
    }

    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Whitespace-delimited words in the raw text, counted before any
    /// punctuation or numeric stripping.
    pub fn word_count(&self) -> usize {
        self.word_count
    }
}

/// Lowercase, strip every non-alphanumeric character from each
/// whitespace-separated word, then drop empty and all-numeric results.
pub fn tokenize(raw_text: &str) -> Vec<String> {
    raw_text
        .split_whitespace()
        .filter_map(|word| {
            let term: String = word
                .chars()
                .flat_map(char::to_lowercase)
                .filter(|c| c.is_alphanumeric())
                .collect();
            if term.is_empty() || term.chars().all(char::is_numeric) {
                None
            } else {
                Some(term)
            }
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord<'a> {
    #[serde(borrow)]
    id: std::borrow::Cow<'a, str>,
    kind: DocumentKind,
    #[serde(borrow)]
    text: std::borrow::Cow<'a, str>,
}

/// Parse `{"id","kind","text"}` JSONL. Blank lines are skipped.
pub fn parse_documents_jsonl(reader: impl BufRead) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Json {
            line: n + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord<'_> = serde_json::from_str(&line).map_err(|e| Error::Json {
            line: n + 1,
            message: e.to_string(),
        })?;
        if record.id.is_empty() {
            return Err(Error::Json {
                line: n + 1,
                message: "empty document id".into(),
            });
        }
        docs.push(Document::new(record.id.into_owned(), record.kind, record.text.into_owned()));
    }
    Ok(docs)
}

pub fn write_documents_jsonl<'a, W: std::io::Write>(
    mut out: W,
    docs: impl IntoIterator<Item = &'a Document>,
) -> std::io::Result<()> {
    for doc in docs {
        let record = DocumentRecord {
            id: doc.id().into(),
            kind: doc.kind(),
            text: doc.raw_text().into(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
