//! The on-disk corpus manifest and the ingest pipeline that produces it.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dedup::{dedup_webpages, DedupParams, DEFAULT_DEDUP_FRACTION, DEFAULT_RESIDUAL_OVERLAP};
use super::document::{parse_documents_jsonl, write_documents_jsonl, Document, DocumentKind};
use super::html::extract_webpage_text;
use super::language::is_probably_english;
use super::links::{is_one_to_one, parse_links_csv, resolve_one_to_one, write_links_csv, KnownLink, RawLink};
use super::split::{parse_split_csv, split_links, write_split_csv, Partition, Split};
use crate::error::{Error, Result};

pub const MIN_WORDS: usize = 100;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub min_words: usize,
    pub dedup_fraction: f64,
    pub residual_overlap: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            min_words: MIN_WORDS,
            dedup_fraction: DEFAULT_DEDUP_FRACTION,
            residual_overlap: DEFAULT_RESIDUAL_OVERLAP,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCounts {
    pub articles: usize,
    pub webpages: usize,
    pub links: usize,
    pub train: usize,
    pub test: usize,
    pub distractors: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub articles_in: usize,
    pub articles_short: usize,
    pub articles_duplicate_id: usize,
    pub webpages_in: usize,
    pub webpages_short: usize,
    pub webpages_non_english: usize,
    pub webpages_duplicate_id: usize,
    pub raw_links_in: usize,
    pub raw_links_unresolved: usize,
    pub webpages_near_duplicate: usize,
    pub residual_overlap_violations: usize,
    pub links_resolved: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestMeta {
    seed: u64,
    train_fraction: f64,
    filter_params: FilterParams,
    counts: ManifestCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ingest: Option<IngestReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    synthetic: Option<serde_json::Value>,
}

/// Admitted documents, the resolved one-to-one links and their split.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusManifest {
    pub articles: Vec<Document>,
    pub webpages: Vec<Document>,
    pub split: Split,
    pub seed: u64,
    pub train_fraction: f64,
    pub filter_params: FilterParams,
    pub ingest: Option<IngestReport>,
    /// Generator parameters when the corpus is synthetic.
    pub synthetic: Option<serde_json::Value>,
}

impl CorpusManifest {
    pub fn links(&self) -> &[KnownLink] {
        &self.split.links
    }

    /// Article ids with no resolved link, in article order.
    pub fn distractors(&self) -> Vec<&str> {
        let linked: HashSet<&str> = self.links().iter().map(|l| l.article_id.as_str()).collect();
        self.articles
            .iter()
            .map(|a| a.id())
            .filter(|id| !linked.contains(id))
            .collect()
    }

    pub fn counts(&self) -> ManifestCounts {
        ManifestCounts {
            articles: self.articles.len(),
            webpages: self.webpages.len(),
            links: self.links().len(),
            train: self.split.train_len(),
            test: self.split.links.len() - self.split.train_len(),
            distractors: self.distractors().len(),
        }
    }

    /// Replace the split with a fresh seeded one.
    pub fn resplit(&mut self, train_fraction: f64, seed: u64) -> Result<()> {
        self.split = split_links(&self.split.links, train_fraction, seed)?;
        self.train_fraction = train_fraction;
        self.seed = seed;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        fn check(message: &str, ids: Vec<String>) -> Result<()> {
            if ids.is_empty() {
                Ok(())
            } else {
                Err(Error::Validation {
                    message: message.to_string(),
                    ids,
                })
            }
        }

        check(
            "documents of the wrong kind",
            self.articles
                .iter()
                .filter(|d| d.kind() != DocumentKind::Article)
                .chain(self.webpages.iter().filter(|d| d.kind() != DocumentKind::Webpage))
                .map(|d| d.id().to_string())
                .collect(),
        )?;
        for (what, docs) in [("article", &self.articles), ("webpage", &self.webpages)] {
            let mut seen = HashSet::new();
            check(
                &format!("duplicate {what} ids"),
                docs.iter()
                    .filter(|d| !seen.insert(d.id()))
                    .map(|d| d.id().to_string())
                    .collect(),
            )?;
        }
        let articles: HashSet<&str> = self.articles.iter().map(|d| d.id()).collect();
        let webpages: HashSet<&str> = self.webpages.iter().map(|d| d.id()).collect();
        check(
            "links reference unknown documents",
            self.links()
                .iter()
                .filter(|l| !articles.contains(l.article_id.as_str()) || !webpages.contains(l.webpage_id.as_str()))
                .map(|l| format!("{}->{}", l.article_id, l.webpage_id))
                .collect(),
        )?;
        if !is_one_to_one(self.links()) {
            let mut a = HashSet::new();
            let mut w = HashSet::new();
            check(
                "links are not one-to-one",
                self.links()
                    .iter()
                    .filter(|l| !a.insert(&l.article_id) | !w.insert(&l.webpage_id))
                    .map(|l| format!("{}->{}", l.article_id, l.webpage_id))
                    .collect(),
            )?;
        }
        if self.split.assignments.len() != self.split.links.len() {
            return Err(Error::Validation {
                message: "split does not cover every link".into(),
                ids: Vec::new(),
            });
        }
        check(
            "documents below the minimum word count",
            self.articles
                .iter()
                .chain(&self.webpages)
                .filter(|d| d.word_count() < self.filter_params.min_words)
                .map(|d| d.id().to_string())
                .collect(),
        )
    }

    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let create = |name: &str| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            File::create(&path)
                .map(BufWriter::new)
                .map_err(|e| Error::io(path, e))
        };
        let io_err = |name: &str| {
            let path = dir.join(name);
            move |e: std::io::Error| Error::io(path, e)
        };

        let mut out = create("articles.jsonl")?;
        write_documents_jsonl(&mut out, &self.articles).map_err(io_err("articles.jsonl"))?;
        out.flush().map_err(io_err("articles.jsonl"))?;

        let mut out = create("webpages.jsonl")?;
        write_documents_jsonl(&mut out, &self.webpages).map_err(io_err("webpages.jsonl"))?;
        out.flush().map_err(io_err("webpages.jsonl"))?;

        write_links_csv(create("links.csv")?, self.links())?;
        write_split_csv(create("split.csv")?, &self.split)?;

        let meta = ManifestMeta {
            seed: self.seed,
            train_fraction: self.train_fraction,
            filter_params: self.filter_params,
            counts: self.counts(),
            ingest: self.ingest.clone(),
            synthetic: self.synthetic.clone(),
        };
        let mut out = create("manifest.json")?;
        serde_json::to_writer_pretty(&mut out, &meta).map_err(|e| Error::Json {
            line: 0,
            message: e.to_string(),
        })?;
        out.write_all(b"\n").map_err(io_err("manifest.json"))?;
        out.flush().map_err(io_err("manifest.json"))?;
        Ok(())
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let open = |name: &str| -> Result<BufReader<File>> {
            let path = dir.join(name);
            File::open(&path)
                .map(BufReader::new)
                .map_err(|e| Error::io(path, e))
        };

        let meta: ManifestMeta = serde_json::from_reader(open("manifest.json")?).map_err(|e| Error::Json {
            line: e.line(),
            message: format!("manifest.json: {e}"),
        })?;
        let articles = parse_documents_jsonl(open("articles.jsonl")?)?;
        let webpages = parse_documents_jsonl(open("webpages.jsonl")?)?;
        let links = parse_links_csv(open("links.csv")?)?;
        let split = parse_split_csv(open("split.csv")?)?;

        let mut from_links: Vec<(&str, &str)> = links
            .iter()
            .map(|l| (l.article_id.as_str(), l.webpage_id.as_str()))
            .collect();
        let mut from_split: Vec<(&str, &str)> = split
            .links
            .iter()
            .map(|l| (l.article_id.as_str(), l.webpage_id.as_str()))
            .collect();
        from_links.sort_unstable();
        from_split.sort_unstable();
        if from_links != from_split {
            let a: HashSet<_> = from_links.iter().collect();
            let b: HashSet<_> = from_split.iter().collect();
            return Err(Error::Validation {
                message: "links.csv and split.csv disagree".into(),
                ids: a
                    .symmetric_difference(&b)
                    .map(|(x, y)| format!("{x}->{y}"))
                    .collect(),
            });
        }

        let manifest = CorpusManifest {
            articles,
            webpages,
            split,
            seed: meta.seed,
            train_fraction: meta.train_fraction,
            filter_params: meta.filter_params,
            ingest: meta.ingest,
            synthetic: meta.synthetic,
        };
        manifest.validate()?;
        if manifest.counts() != meta.counts {
            return Err(Error::Validation {
                message: format!(
                    "manifest.json counts {:?} do not match files {:?}",
                    meta.counts,
                    manifest.counts()
                ),
                ids: Vec::new(),
            });
        }
        Ok(manifest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestParams {
    pub min_words: usize,
    pub dedup: DedupParams,
    pub english_filter: bool,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for IngestParams {
    fn default() -> Self {
        IngestParams {
            min_words: MIN_WORDS,
            dedup: DedupParams::default(),
            english_filter: true,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed: 0,
        }
    }
}

/// Filter, deduplicate, link and split raw corpora into a manifest.
///
/// Webpage text is passed through [`extract_webpage_text`] first, so HTML and
/// plain-text inputs are both accepted.
pub fn build_manifest(
    articles: Vec<Document>,
    webpages: Vec<Document>,
    raw_links: &[RawLink],
    params: IngestParams,
) -> Result<(CorpusManifest, IngestReport)> {
    let mut report = IngestReport {
        articles_in: articles.len(),
        webpages_in: webpages.len(),
        raw_links_in: raw_links.len(),
        ..IngestReport::default()
    };

    let mut seen = HashSet::new();
    let mut admitted_articles = Vec::with_capacity(articles.len());
    for doc in articles {
        if doc.kind() != DocumentKind::Article {
            return Err(Error::contract(format!("{} is not an article", doc.id())));
        }
        if doc.word_count() < params.min_words {
            report.articles_short += 1;
        } else if !seen.insert(doc.id().to_string()) {
            report.articles_duplicate_id += 1;
        } else {
            admitted_articles.push(doc);
        }
    }

    let mut seen = HashSet::new();
    let mut admitted_pages = Vec::with_capacity(webpages.len());
    for doc in webpages {
        if doc.kind() != DocumentKind::Webpage {
            return Err(Error::contract(format!("{} is not a webpage", doc.id())));
        }
        let doc = Document::new(doc.id(), DocumentKind::Webpage, extract_webpage_text(doc.raw_text()));
        if doc.word_count() < params.min_words {
            report.webpages_short += 1;
        } else if params.english_filter && !matches!(is_probably_english(doc.tokens()), Ok(true)) {
            report.webpages_non_english += 1;
        } else if !seen.insert(doc.id().to_string()) {
            report.webpages_duplicate_id += 1;
        } else {
            admitted_pages.push(doc);
        }
    }

    let article_ids: HashSet<&str> = admitted_articles.iter().map(|d| d.id()).collect();
    let page_ids: HashSet<&str> = admitted_pages.iter().map(|d| d.id()).collect();
    let usable: Vec<RawLink> = raw_links
        .iter()
        .filter(|l| article_ids.contains(l.article_id.as_str()) && page_ids.contains(l.webpage_id.as_str()))
        .cloned()
        .collect();
    report.raw_links_unresolved = raw_links.len() - usable.len();

    let linked_pages: HashSet<&str> = usable.iter().map(|l| l.webpage_id.as_str()).collect();
    let candidates: Vec<Document> = admitted_pages
        .iter()
        .filter(|d| linked_pages.contains(d.id()))
        .cloned()
        .collect();
    let dedup = dedup_webpages(&candidates, &usable, params.dedup)?;
    report.webpages_near_duplicate = dedup.dropped.len();
    report.residual_overlap_violations = dedup.residual_violations.len();

    let retained: HashSet<&str> = dedup.retained.iter().map(|d| d.id()).collect();
    let usable: Vec<RawLink> = usable
        .into_iter()
        .filter(|l| retained.contains(l.webpage_id.as_str()))
        .collect();
    let resolved = resolve_one_to_one(&usable, &dedup.retained)?;
    report.links_resolved = resolved.len();

    let final_pages: HashSet<&str> = resolved.iter().map(|l| l.webpage_id.as_str()).collect();
    let webpages: Vec<Document> = dedup
        .retained
        .iter()
        .filter(|d| final_pages.contains(d.id()))
        .cloned()
        .collect();

    let split = split_links(&resolved, params.train_fraction, params.seed)?;
    let manifest = CorpusManifest {
        articles: admitted_articles,
        webpages,
        split,
        seed: params.seed,
        train_fraction: params.train_fraction,
        filter_params: FilterParams {
            min_words: params.min_words,
            dedup_fraction: params.dedup.fraction,
            residual_overlap: params.dedup.residual_overlap,
        },
        ingest: Some(report.clone()),
        synthetic: None,
    };
    manifest.validate()?;
    Ok((manifest, report))
}

/// Lookup helpers used by the evaluation pipeline.
pub(crate) fn index_by_id(docs: &[Document]) -> HashMap<&str, usize> {
    docs.iter().enumerate().map(|(i, d)| (d.id(), i)).collect()
}

impl Partition {
    pub fn is_train(self) -> bool {
        self == Partition::Train
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(prefix: &str, n: usize) -> String {
        (0..n).map(|i| format!("{prefix}{i} the")).collect::<Vec<_>>().join(" ")
    }

    fn fixture() -> (Vec<Document>, Vec<Document>, Vec<RawLink>) {
        let mut articles = Vec::new();
        for i in 0..6 {
            articles.push(Document::new(format!("{i}"), DocumentKind::Article, words(&format!("a{i}x"), 60)));
        }
        articles.push(Document::new("short", DocumentKind::Article, "too short"));
        let mut pages = Vec::new();
        for i in 0..4 {
            pages.push(Document::new(
                format!("https://n.org/{i}"),
                DocumentKind::Webpage,
                format!("<p>{}</p>", words(&format!("w{i}y"), 60)),
            ));
        }
        // Near-copy of page 0, linked to the same article.
        pages.push(Document::new(
            "https://mirror.org/0",
            DocumentKind::Webpage,
            format!("{} extra", words("w0y", 60)),
        ));
        pages.push(Document::new("https://de.org/x", DocumentKind::Webpage, vec!["Impfstoff"; 120].join(" ")));
        let links = vec![
            RawLink::new("0", "https://n.org/0"),
            RawLink::new("0", "https://mirror.org/0"),
            RawLink::new("1", "https://n.org/1"),
            RawLink::new("2", "https://n.org/2"),
            RawLink::new("3", "https://n.org/3"),
            RawLink::new("4", "https://de.org/x"),
            RawLink::new("short", "https://n.org/3"),
        ];
        (articles, pages, links)
    }

    #[test]
    fn ingest_pipeline_counts() {
        let (articles, pages, links) = fixture();
        let (manifest, report) = build_manifest(articles, pages, &links, IngestParams::default()).unwrap();
        assert_eq!(report.articles_short, 1);
        assert_eq!(report.webpages_non_english, 1);
        assert_eq!(report.webpages_near_duplicate, 1);
        assert_eq!(report.raw_links_unresolved, 2);
        assert_eq!(manifest.links().len(), 4);
        assert_eq!(manifest.distractors(), vec!["4", "5"]);
        let counts = manifest.counts();
        assert_eq!((counts.train, counts.test), (3, 1));
        // The mirror copy is longer and wins the near-duplicate cluster.
        assert!(manifest.links().contains(&KnownLink::new("0", "https://mirror.org/0")));
    }

    #[test]
    fn directory_round_trip() {
        let (articles, pages, links) = fixture();
        let (manifest, _) = build_manifest(articles, pages, &links, IngestParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        manifest.write_dir(dir.path()).unwrap();
        let back = CorpusManifest::read_dir(dir.path()).unwrap();
        assert_eq!(back, manifest);
    }

    #[test]
    fn inconsistent_directory_is_rejected() {
        let (articles, pages, links) = fixture();
        let (manifest, _) = build_manifest(articles, pages, &links, IngestParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        manifest.write_dir(dir.path()).unwrap();
        fs::write(dir.path().join("links.csv"), "article_id,webpage_id\n0,https://elsewhere\n").unwrap();
        match CorpusManifest::read_dir(dir.path()) {
            Err(Error::Validation { ids, .. }) => assert!(!ids.is_empty()),
            other => panic!("expected validation error, got {other:?}"),
        }
    }
}
