//! Offline importer for E-utilities `efetch` XML (`PubmedArticleSet`).

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::document::{Document, DocumentKind};
use crate::error::{Error, Result};

#[derive(Debug, Default, Clone, PartialEq)]
pub struct PubmedImport {
    pub documents: Vec<Document>,
    /// `PubmedArticle` records that carried no PMID.
    pub skipped_missing_pmid: usize,
}

pub fn import_pubmed_xml(path: impl AsRef<Path>) -> Result<PubmedImport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_pubmed_xml(BufReader::new(file))
}

#[derive(Default)]
struct Record {
    pmid: Option<String>,
    title: String,
    abstract_parts: Vec<String>,
    current_part: Option<String>,
}

impl Record {
    fn into_document(self) -> Option<Document> {
        let pmid = self.pmid?.trim().to_string();
        if pmid.is_empty() {
            return None;
        }
        let mut text = self.title.split_whitespace().collect::<Vec<_>>().join(" ");
        for part in &self.abstract_parts {
            let part = part.split_whitespace().collect::<Vec<_>>().join(" ");
            if part.is_empty() {
                continue;
            }
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(&part);
        }
        Some(Document::new(pmid, DocumentKind::Article, text))
    }
}

/// Stream-parse a `PubmedArticleSet`. Raw text is the title followed by every
/// `AbstractText` section, separated by single spaces.
pub fn parse_pubmed_xml(input: impl BufRead) -> Result<PubmedImport> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().check_end_names = true;

    let mut buf = Vec::new();
    let mut path: Vec<Vec<u8>> = Vec::new();
    let mut record: Option<Record> = None;
    let mut out = PubmedImport::default();

    let xml_err = |reader: &Reader<_>, message: String| Error::Xml {
        offset: reader.error_position(),
        message,
    };

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| xml_err(&reader, e.to_string()))?;
        match event {
            Event::Start(start) => {
                let name = start.name().as_ref().to_vec();
                match name.as_slice() {
                    b"PubmedArticle" => record = Some(Record::default()),
                    b"AbstractText" => {
                        if let Some(rec) = record.as_mut() {
                            rec.current_part = Some(String::new());
                        }
                    }
                    _ => {}
                }
                path.push(name);
            }
            Event::End(_) => {
                let Some(name) = path.pop() else {
                    return Err(xml_err(&reader, "unbalanced end tag".into()));
                };
                match name.as_slice() {
                    b"PubmedArticle" => {
                        if let Some(rec) = record.take() {
                            match rec.into_document() {
                                Some(doc) => out.documents.push(doc),
                                None => out.skipped_missing_pmid += 1,
                            }
                        }
                    }
                    b"AbstractText" => {
                        if let Some(rec) = record.as_mut() {
                            if let Some(part) = rec.current_part.take() {
                                rec.abstract_parts.push(part);
                            }
                        }
                    }
                    _ => {}
                }
            }
            Event::Text(text) => {
                let text = text
                    .unescape()
                    .map_err(|e| xml_err(&reader, e.to_string()))?;
                if let Some(rec) = record.as_mut() {
                    append_text(rec, &path, &text);
                }
            }
            Event::CData(data) => {
                let text = String::from_utf8_lossy(&data.into_inner()).into_owned();
                if let Some(rec) = record.as_mut() {
                    append_text(rec, &path, &text);
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if !path.is_empty() {
        return Err(Error::Xml {
            offset: reader.buffer_position(),
            message: format!(
                "unexpected end of document inside <{}>",
                String::from_utf8_lossy(path.last().unwrap())
            ),
        });
    }
    Ok(out)
}

fn append_text(rec: &mut Record, path: &[Vec<u8>], text: &str) {
    let n = path.len();
    if n >= 2 && path[n - 1] == b"PMID" && path[n - 2] == b"MedlineCitation" {
        rec.pmid.get_or_insert_with(String::new).push_str(text);
    } else if path.iter().any(|p| p == b"ArticleTitle") {
        rec.title.push_str(text);
    } else if let Some(part) = rec.current_part.as_mut() {
        part.push_str(text);
    }
}
