//! Synthetic stand-in corpus: pseudo-abstracts drawn from topical Zipfian
//! vocabularies, and webpages that paraphrase their linked article through a
//! fixed synonym map and pad it with filler sentences.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    build_manifest, CorpusManifest, DedupParams, Document, DocumentKind, IngestParams, RawLink, DEFAULT_TRAIN_FRACTION,
    FUNCTION_WORDS, MIN_WORDS,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthParams {
    pub n_distractors: usize,
    pub n_pairs: usize,
    /// Fraction of article tokens swapped for their synonym in the webpage.
    pub rho: f64,
    pub seed: u64,
    pub n_topics: usize,
    pub vocab_size: usize,
    pub train_fraction: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_distractors: 2000,
            n_pairs: 300,
            rho: 0.3,
            seed: 0,
            n_topics: 12,
            vocab_size: 1000,
            train_fraction: DEFAULT_TRAIN_FRACTION,
        }
    }
}

const TOPIC_WORDS: usize = 60;
const FUNCTION_WORD_COUNT: usize = 60;
const MIN_DOC_WORDS: usize = 120;
const ARTICLE_WORDS: (usize, usize) = (120, 180);
const FUNCTION_SHARE: f64 = 0.35;
const TOPIC_SHARE: f64 = 0.45;
const PRIMARY_TOPIC_SHARE: f64 = 0.75;
/// Size of the common-word head that synonyms are drawn from.
const COMMON_WORDS: usize = 300;
/// Filler added to a webpage, as a multiple of the article length.
const FILLER_RATIO: (f64, f64) = (2.0, 4.0);

const NEWS_WORDS: [&str; 24] = [
    "researchers", "study", "found", "new", "university", "published", "journal", "according", "team",
    "results", "scientists", "report", "findings", "professor", "health", "data", "people", "year",
    "work", "suggests", "experts", "paper", "lead", "author",
];

const CONSONANTS: [char; 14] = ['b', 'd', 'f', 'g', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v', 'z'];
const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

/// Three consonant-vowel syllables per word; distinct for distinct `i`.
fn pseudo_word(i: usize) -> String {
    let n = CONSONANTS.len() * VOWELS.len();
    // Multiplying by a unit modulo n^3 spreads consecutive indices over all
    // syllable positions.
    let mut rest = (i % n.pow(3)) * 7919 % n.pow(3);
    let mut word = String::with_capacity(6);
    for _ in 0..3 {
        let s = rest % n;
        rest /= n;
        word.push(CONSONANTS[s / VOWELS.len()]);
        word.push(VOWELS[s % VOWELS.len()]);
    }
    word
}

fn zipf_weights(n: usize, exponent: f64) -> Vec<f64> {
    (0..n).map(|r| 1.0 / ((r + 1) as f64).powf(exponent)).collect()
}

struct Language {
    content: Vec<String>,
    function: Vec<&'static str>,
    function_dist: WeightedIndex<f64>,
    topics: Vec<(Vec<usize>, WeightedIndex<f64>)>,
    background: (Vec<usize>, WeightedIndex<f64>),
    content_synonym: Vec<usize>,
    function_synonym: Vec<usize>,
}

#[derive(Clone, Copy)]
enum Token {
    Function(usize),
    Content(usize),
}

impl Language {
    fn new(params: &SynthParams, rng: &mut ChaCha8Rng) -> Self {
        let content: Vec<String> = (0..params.vocab_size).map(pseudo_word).collect();
        let function: Vec<&'static str> = FUNCTION_WORDS[..FUNCTION_WORD_COUNT].to_vec();
        let function_dist = WeightedIndex::new(zipf_weights(function.len(), 1.0)).expect("positive weights");

        let topic_size = TOPIC_WORDS.min(params.vocab_size);
        let topics = (0..params.n_topics)
            .map(|_| {
                let words = rand::seq::index::sample(rng, params.vocab_size, topic_size).into_vec();
                (words, WeightedIndex::new(zipf_weights(topic_size, 1.0)).expect("positive weights"))
            })
            .collect();
        let mut order: Vec<usize> = (0..params.vocab_size).collect();
        order.shuffle(rng);
        // Technical words are paraphrased with common ones: each word maps to
        // a fixed word from the head of the background distribution.
        let head = COMMON_WORDS.min(params.vocab_size);
        let content_synonym = (0..params.vocab_size).map(|_| order[rng.gen_range(0..head)]).collect();
        let background = (order, WeightedIndex::new(zipf_weights(params.vocab_size, 1.4)).expect("positive weights"));

        Language {
            content,
            function_dist,
            topics,
            background,
            content_synonym,
            function_synonym: pairing(function.len(), rng),
            function,
        }
    }

    fn article(&self, rng: &mut ChaCha8Rng) -> Vec<Token> {
        let len = rng.gen_range(ARTICLE_WORDS.0..=ARTICLE_WORDS.1);
        let primary = rng.gen_range(0..self.topics.len());
        let secondary = rng.gen_range(0..self.topics.len());
        (0..len)
            .map(|_| {
                let u: f64 = rng.gen();
                if u < FUNCTION_SHARE {
                    Token::Function(self.function_dist.sample(rng))
                } else if u < FUNCTION_SHARE + TOPIC_SHARE {
                    let t = if rng.gen_bool(PRIMARY_TOPIC_SHARE) { primary } else { secondary };
                    let (words, dist) = &self.topics[t];
                    Token::Content(words[dist.sample(rng)])
                } else {
                    Token::Content(self.background.0[self.background.1.sample(rng)])
                }
            })
            .collect()
    }

    fn paraphrase(&self, tokens: &[Token], rho: f64, rng: &mut ChaCha8Rng) -> Vec<String> {
        let mut words: Vec<String> = tokens
            .iter()
            .map(|&t| {
                let swap = rng.gen_bool(rho);
                match t {
                    Token::Function(i) if swap => self.function[self.function_synonym[i]].to_string(),
                    Token::Function(i) => self.function[i].to_string(),
                    Token::Content(i) if swap => self.content[self.content_synonym[i]].clone(),
                    Token::Content(i) => self.content[i].clone(),
                }
            })
            .collect();
        let target = (words.len() as f64 * (1.0 + rng.gen_range(FILLER_RATIO.0..=FILLER_RATIO.1))) as usize;
        while words.len() < target.max(MIN_DOC_WORDS) {
            words.extend(self.filler_sentence(rng));
        }
        words
    }

    fn filler_sentence(&self, rng: &mut ChaCha8Rng) -> Vec<String> {
        let len = rng.gen_range(10..=15);
        (0..len)
            .map(|_| {
                match rng.gen_range(0..3) {
                    0 => self.function[self.function_dist.sample(rng)].to_string(),
                    1 => NEWS_WORDS[rng.gen_range(0..NEWS_WORDS.len())].to_string(),
                    _ => self.content[self.background.0[self.background.1.sample(rng)]].clone(),
                }
            })
            .collect()
    }

    fn render(&self, tokens: &[Token]) -> Vec<String> {
        tokens
            .iter()
            .map(|&t| match t {
                Token::Function(i) => self.function[i].to_string(),
                Token::Content(i) => self.content[i].clone(),
            })
            .collect()
    }
}

/// A fixed-point-free involution on `0..n` (one element stays put when `n`
/// is odd).
fn pairing(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut map: Vec<usize> = (0..n).collect();
    for pair in order.chunks_exact(2) {
        map[pair[0]] = pair[1];
        map[pair[1]] = pair[0];
    }
    map
}

/// Words grouped into sentences of 8 to 16 words.
fn as_text(words: &[String], rng: &mut ChaCha8Rng) -> String {
    let mut text = String::new();
    let mut rest = words;
    while !rest.is_empty() {
        let n = rng.gen_range(8..=16).min(rest.len());
        let (sentence, tail) = rest.split_at(n);
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(&sentence.join(" "));
        text.push('.');
        rest = tail;
    }
    text
}

/// Generate the fixture and pass it through the ingest pipeline.
pub fn generate_synthetic(params: &SynthParams) -> Result<CorpusManifest> {
    if params.n_pairs < 2 || params.n_topics == 0 || params.vocab_size < 2 {
        return Err(Error::contract("synthetic corpus needs >= 2 pairs, >= 1 topic and >= 2 words"));
    }
    if !(0.0..=1.0).contains(&params.rho) {
        return Err(Error::contract(format!("rho must be in [0, 1], got {}", params.rho)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let language = Language::new(params, &mut rng);

    let total = params.n_pairs + params.n_distractors;
    let mut ids = HashSet::with_capacity(total);
    while ids.len() < total {
        ids.insert(rng.gen_range(10_000_000u32..100_000_000));
    }
    let mut ids: Vec<u32> = ids.into_iter().collect();
    ids.sort_unstable();
    ids.shuffle(&mut rng);

    let mut articles = Vec::with_capacity(total);
    let mut webpages = Vec::with_capacity(params.n_pairs);
    let mut links = Vec::with_capacity(params.n_pairs);
    for (i, id) in ids.iter().enumerate() {
        let id = id.to_string();
        let tokens = language.article(&mut rng);
        let text = as_text(&language.render(&tokens), &mut rng);
        articles.push(Document::new(&id, DocumentKind::Article, text));
        if i < params.n_pairs {
            let url = format!("https://news.example.org/story/{i:04}");
            let words = language.paraphrase(&tokens, params.rho, &mut rng);
            webpages.push(Document::new(&url, DocumentKind::Webpage, as_text(&words, &mut rng)));
            links.push(RawLink::new(id, url));
        }
    }
    articles.sort_by(|a, b| a.id().cmp(b.id()));

    let ingest = IngestParams {
        min_words: MIN_WORDS,
        dedup: DedupParams::default(),
        english_filter: true,
        train_fraction: params.train_fraction,
        seed: params.seed,
    };
    let (mut manifest, report) = build_manifest(articles, webpages, &links, ingest)?;
    if report.links_resolved != params.n_pairs {
        return Err(Error::Validation {
            message: format!("only {} of {} synthetic pairs survived ingest", report.links_resolved, params.n_pairs),
            ids: Vec::new(),
        });
    }
    manifest.synthetic = Some(serde_json::to_value(params).expect("params serialize"));
    Ok(manifest)
}
