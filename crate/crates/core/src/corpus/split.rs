use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::links::KnownLink;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Test,
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Partition::Train => "train",
            Partition::Test => "test",
        })
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Partition::Train),
            "test" => Ok(Partition::Test),
            other => Err(Error::Csv(format!("unknown partition {other:?}"))),
        }
    }
}

/// Partition of a link set; `assignments[i]` belongs to `links[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub links: Vec<KnownLink>,
    pub assignments: Vec<Partition>,
}

impl Split {
    pub fn train(&self) -> impl Iterator<Item = &KnownLink> {
        self.of(Partition::Train)
    }

    pub fn test(&self) -> impl Iterator<Item = &KnownLink> {
        self.of(Partition::Test)
    }

    fn of(&self, part: Partition) -> impl Iterator<Item = &KnownLink> {
        self.links
            .iter()
            .zip(&self.assignments)
            .filter(move |(_, p)| **p == part)
            .map(|(l, _)| l)
    }

    pub fn train_len(&self) -> usize {
        self.assignments.iter().filter(|p| **p == Partition::Train).count()
    }
}

/// Seeded uniform train/test assignment with exactly
/// `round(train_fraction * n)` training links.
pub fn split_links(links: &[KnownLink], train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::contract(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    if links.len() < 2 {
        return Err(Error::contract("need at least two links to split"));
    }
    let n_train = (train_fraction * links.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..links.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut assignments = vec![Partition::Test; links.len()];
    for &i in &order[..n_train] {
        assignments[i] = Partition::Train;
    }
    Ok(Split {
        links: links.to_vec(),
        assignments,
    })
}

#[derive(Serialize, Deserialize)]
struct SplitRow {
    article_id: String,
    webpage_id: String,
    partition: Partition,
}

pub fn write_split_csv<W: Write>(out: W, split: &Split) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for (link, part) in split.links.iter().zip(&split.assignments) {
        writer.serialize(SplitRow {
            article_id: link.article_id.clone(),
            webpage_id: link.webpage_id.clone(),
            partition: *part,
        })?;
    }
    writer.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

/// Read `article_id,webpage_id,partition` rows (header required).
pub fn parse_split_csv(input: impl Read) -> Result<Split> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["article_id", "webpage_id", "partition"] {
        return Err(Error::Csv("split header must be `article_id,webpage_id,partition`".into()));
    }
    let mut split = Split {
        links: Vec::new(),
        assignments: Vec::new(),
    };
    for row in reader.deserialize() {
        let row: SplitRow = row?;
        split.links.push(KnownLink::new(row.article_id, row.webpage_id));
        split.assignments.push(row.partition);
    }
    Ok(split)
}
