use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::document::Document;
use crate::error::{Error, Result};

/// An article/webpage pair as reported by the link source; may repeat ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RawLink {
    pub article_id: String,
    pub webpage_id: String,
}

/// A verified pair in a resolved, one-to-one link set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KnownLink {
    pub article_id: String,
    pub webpage_id: String,
}

impl RawLink {
    pub fn new(article_id: impl Into<String>, webpage_id: impl Into<String>) -> Self {
        RawLink {
            article_id: article_id.into(),
            webpage_id: webpage_id.into(),
        }
    }
}

impl KnownLink {
    pub fn new(article_id: impl Into<String>, webpage_id: impl Into<String>) -> Self {
        KnownLink {
            article_id: article_id.into(),
            webpage_id: webpage_id.into(),
        }
    }
}

/// Read an `article_id,webpage_id` CSV. The header row is mandatory.
pub fn parse_links_csv(input: impl Read) -> Result<Vec<RawLink>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "article_id" || &headers[1] != "webpage_id" {
        return Err(Error::Csv(format!(
            "links header must be `article_id,webpage_id`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut links = Vec::new();
    for row in reader.deserialize() {
        let link: RawLink = row?;
        if link.article_id.is_empty() || link.webpage_id.is_empty() {
            return Err(Error::Csv("empty id in links file".into()));
        }
        links.push(link);
    }
    Ok(links)
}

pub fn write_links_csv<'a, W: Write>(
    out: W,
    links: impl IntoIterator<Item = &'a KnownLink>,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["article_id", "webpage_id"])?;
    for link in links {
        writer.write_record([&link.article_id, &link.webpage_id])?;
    }
    writer.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

/// Reduce a many-to-many link multigraph to a one-to-one link set.
///
/// Pairs whose article and webpage each occur exactly once are admitted
/// first. Every remaining article, in sorted id order, then takes its unused
/// linked webpage with the most words (ties by smaller id). Articles left
/// without an available webpage are dropped.
pub fn resolve_one_to_one(links: &[RawLink], webpages: &[Document]) -> Result<Vec<KnownLink>> {
    let word_counts: HashMap<&str, usize> = webpages.iter().map(|d| (d.id(), d.word_count())).collect();
    if let Some(missing) = links
        .iter()
        .find(|l| !word_counts.contains_key(l.webpage_id.as_str()))
    {
        return Err(Error::contract(format!(
            "link references unknown webpage {}",
            missing.webpage_id
        )));
    }

    let unique: Vec<&RawLink> = {
        let mut seen = HashSet::new();
        let mut v: Vec<&RawLink> = links.iter().filter(|l| seen.insert(*l)).collect();
        v.sort();
        v
    };

    let mut article_degree: HashMap<&str, usize> = HashMap::new();
    let mut webpage_degree: HashMap<&str, usize> = HashMap::new();
    for link in &unique {
        *article_degree.entry(&link.article_id).or_default() += 1;
        *webpage_degree.entry(&link.webpage_id).or_default() += 1;
    }

    let mut resolved = Vec::new();
    let mut used_articles: HashSet<&str> = HashSet::new();
    let mut used_webpages: HashSet<&str> = HashSet::new();
    for link in &unique {
        if article_degree[link.article_id.as_str()] == 1 && webpage_degree[link.webpage_id.as_str()] == 1 {
            used_articles.insert(&link.article_id);
            used_webpages.insert(&link.webpage_id);
            resolved.push(KnownLink::new(&link.article_id, &link.webpage_id));
        }
    }

    let mut remaining: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for link in &unique {
        if !used_articles.contains(link.article_id.as_str()) {
            remaining.entry(&link.article_id).or_default().push(&link.webpage_id);
        }
    }
    for (article, candidates) in remaining {
        let best = candidates
            .into_iter()
            .filter(|w| !used_webpages.contains(w))
            .max_by(|a, b| word_counts[a].cmp(&word_counts[b]).then_with(|| b.cmp(a)));
        if let Some(webpage) = best {
            used_webpages.insert(webpage);
            resolved.push(KnownLink::new(article, webpage));
        }
    }

    resolved.sort();
    Ok(resolved)
}

/// True iff no article id and no webpage id repeats.
pub fn is_one_to_one(links: &[KnownLink]) -> bool {
    let mut articles = HashSet::new();
    let mut webpages = HashSet::new();
    links
        .iter()
        .all(|l| articles.insert(&l.article_id) && webpages.insert(&l.webpage_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DocumentKind;
    use proptest::prelude::*;

    fn page(id: &str, words: usize) -> Document {
        Document::new(id, DocumentKind::Webpage, vec!["w"; words].join(" "))
    }

    fn raw(pairs: &[(&str, &str)]) -> Vec<RawLink> {
        pairs.iter().map(|(a, w)| RawLink::new(*a, *w)).collect()
    }

    #[test]
    fn already_one_to_one() {
        let out = resolve_one_to_one(&raw(&[("p1", "u1")]), &[page("u1", 5)]).unwrap();
        assert_eq!(out, vec![KnownLink::new("p1", "u1")]);
    }

    #[test]
    fn picks_longest_webpage() {
        let pages = [page("u1", 5), page("u2", 9)];
        let out = resolve_one_to_one(&raw(&[("p1", "u1"), ("p1", "u2")]), &pages).unwrap();
        assert_eq!(out, vec![KnownLink::new("p1", "u2")]);
    }

    #[test]
    fn shared_webpage_sorted_order() {
        // u1 is shared and p2 has two pages, so nothing is admitted up
        // front; p1 is processed first and claims u1.
        let pages = [page("u1", 50), page("u3", 10)];
        let out = resolve_one_to_one(&raw(&[("p1", "u1"), ("p2", "u1"), ("p2", "u3")]), &pages).unwrap();
        assert_eq!(out, vec![KnownLink::new("p1", "u1"), KnownLink::new("p2", "u3")]);
        assert!(is_one_to_one(&out));
    }

    #[test]
    fn unknown_webpage_is_contract_violation() {
        assert!(matches!(
            resolve_one_to_one(&raw(&[("p1", "nope")]), &[]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn csv_requires_header() {
        let ok = "article_id,webpage_id\n1,https://a\n2,https://b\n";
        assert_eq!(parse_links_csv(ok.as_bytes()).unwrap().len(), 2);
        assert!(parse_links_csv("1,https://a\n".as_bytes()).is_err());
        assert!(parse_links_csv("article_id,webpage_id\n1\n".as_bytes()).is_err());
    }

    /// Maximality: no raw link could be added without breaking 1:1.
    fn is_maximal(raw_links: &[RawLink], resolved: &[KnownLink]) -> bool {
        let arts: HashSet<_> = resolved.iter().map(|l| &l.article_id).collect();
        let pages: HashSet<_> = resolved.iter().map(|l| &l.webpage_id).collect();
        raw_links
            .iter()
            .all(|l| arts.contains(&l.article_id) || pages.contains(&l.webpage_id))
    }

    proptest! {
        #[test]
        fn resolution_is_one_to_one_and_maximal(
            edges in proptest::collection::vec((0u8..8, 0u8..8), 0..30),
            lens in proptest::collection::vec(1usize..40, 8),
        ) {
            let links: Vec<RawLink> = edges.iter().map(|(a, w)| RawLink::new(format!("p{a}"), format!("u{w}"))).collect();
            let pages: Vec<Document> = (0..8).map(|i| page(&format!("u{i}"), lens[i])).collect();
            let out = resolve_one_to_one(&links, &pages).unwrap();
            prop_assert!(is_one_to_one(&out));
            prop_assert!(is_maximal(&links, &out));
            for l in &out {
                prop_assert!(links.iter().any(|r| r.article_id == l.article_id && r.webpage_id == l.webpage_id));
            }
        }
    }
}
