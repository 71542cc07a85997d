//! Near-duplicate webpage removal within groups that share a linked article.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::document::Document;
use super::lcs::{normalize, SuffixAutomaton};
use super::links::RawLink;
use crate::error::{Error, Result};

pub const DEFAULT_DEDUP_FRACTION: f64 = 0.5;
pub const DEFAULT_RESIDUAL_OVERLAP: f64 = 0.1;

/// How the surviving page of a near-duplicate cluster is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Representative {
    /// Longest normalized text wins; ties go to the smaller id.
    Longest,
    /// Seeded random priority order.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DedupParams {
    pub fraction: f64,
    pub residual_overlap: f64,
    pub representative: Representative,
}

impl Default for DedupParams {
    fn default() -> Self {
        DedupParams {
            fraction: DEFAULT_DEDUP_FRACTION,
            residual_overlap: DEFAULT_RESIDUAL_OVERLAP,
            representative: Representative::Longest,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DedupOutcome {
    /// Surviving webpages, sorted by id.
    pub retained: Vec<Document>,
    /// `(dropped, kept)` pairs: each dropped page and the retained page it duplicated.
    pub dropped: Vec<(String, String)>,
    /// Retained pairs sharing an article whose overlap still exceeds
    /// `residual_overlap` of the longer text.
    pub residual_violations: Vec<(String, String)>,
}

/// Collapse near-duplicate webpages linked to the same article.
///
/// Two pages are near-duplicates when their longest common substring is
/// longer than `fraction` of the longer normalized text. Pages are visited in
/// priority order and a page is dropped if it near-duplicates any already
/// retained page it shares an article with.
pub fn dedup_webpages(
    webpages: &[Document],
    links: &[RawLink],
    params: DedupParams,
) -> Result<DedupOutcome> {
    if !(params.fraction > 0.0 && params.fraction <= 1.0) {
        return Err(Error::contract(format!(
            "dedup fraction must be in (0, 1], got {}",
            params.fraction
        )));
    }

    let by_id: HashMap<&str, &Document> = webpages.iter().map(|d| (d.id(), d)).collect();
    let normalized: HashMap<&str, Vec<char>> = webpages
        .par_iter()
        .map(|d| (d.id(), normalize(d.raw_text())))
        .collect();

    let mut groups: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for link in links {
        if by_id.contains_key(link.webpage_id.as_str()) {
            groups
                .entry(&link.article_id)
                .or_default()
                .insert(by_id[link.webpage_id.as_str()].id());
        }
    }

    let mut pairs: BTreeSet<(&str, &str)> = BTreeSet::new();
    for members in groups.values() {
        let members: Vec<&str> = members.iter().copied().collect();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                pairs.insert((a, b));
            }
        }
    }

    let overlaps: HashMap<(&str, &str), f64> = pairs
        .into_par_iter()
        .map(|(a, b)| {
            let (na, nb) = (&normalized[a], &normalized[b]);
            let longer = na.len().max(nb.len());
            let common = if na.len() <= nb.len() {
                SuffixAutomaton::new(na).longest_common_substring(nb)
            } else {
                SuffixAutomaton::new(nb).longest_common_substring(na)
            };
            let ratio = if longer == 0 { 1.0 } else { common as f64 / longer as f64 };
            ((a, b), ratio)
        })
        .collect();
    let overlap = |a: &str, b: &str| -> Option<f64> {
        let key = if a < b { (a, b) } else { (b, a) };
        overlaps.get(&key).copied()
    };

    let mut order: Vec<&str> = webpages.iter().map(|d| d.id()).collect();
    order.sort_unstable();
    order.dedup();
    match params.representative {
        Representative::Longest => {
            order.sort_by(|a, b| normalized[b].len().cmp(&normalized[a].len()).then_with(|| a.cmp(b)));
        }
        Representative::Random { seed } => {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
    }

    let mut kept: Vec<&str> = Vec::new();
    let mut kept_set: HashSet<&str> = HashSet::new();
    let mut dropped = Vec::new();
    for page in order {
        let duplicate_of = kept
            .iter()
            .find(|k| overlap(page, k).is_some_and(|r| r > params.fraction));
        match duplicate_of {
            Some(k) => dropped.push((page.to_string(), k.to_string())),
            None => {
                kept.push(page);
                kept_set.insert(page);
            }
        }
    }

    let mut residual_violations: Vec<(String, String)> = overlaps
        .iter()
        .filter(|((a, b), r)| kept_set.contains(a) && kept_set.contains(b) && **r > params.residual_overlap)
        .map(|((a, b), _)| (a.to_string(), b.to_string()))
        .collect();
    residual_violations.sort();
    dropped.sort();

    let mut retained: Vec<Document> = kept.iter().map(|id| by_id[id].clone()).collect();
    retained.sort_by(|a, b| a.id().cmp(b.id()));

    Ok(DedupOutcome {
        retained,
        dropped,
        residual_violations,
    })
}
