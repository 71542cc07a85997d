use std::collections::HashSet;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Minimum share of function words for a text to count as English.
pub const ENGLISH_FUNCTION_WORD_RATIO: f64 = 0.05;

pub(crate) const FUNCTION_WORDS: [&str; 150] = [
    "the", "of", "and", "a", "an", "to", "in", "is", "was", "that", "for", "it", "as", "with",
    "be", "on", "not", "he", "she", "i", "this", "are", "or", "his", "her", "by", "from", "at",
    "which", "but", "have", "has", "had", "they", "you", "were", "their", "one", "all", "we",
    "can", "there", "been", "if", "more", "when", "will", "would", "who", "so", "no", "its",
    "also", "than", "them", "these", "other", "into", "some", "could", "may", "only", "our",
    "any", "about", "such", "what", "after", "most", "over", "those", "should", "between",
    "both", "each", "through", "under", "while", "where", "because", "before", "then", "very",
    "how", "many", "much", "us", "him", "my", "your", "me", "do", "does", "did", "being", "out",
    "up", "down", "off", "again", "further", "once", "here", "why", "own", "same", "too",
    "just", "now", "during", "against", "without", "within", "upon", "among", "since", "until",
    "though", "although", "however", "whether", "either", "neither", "nor", "yet", "every",
    "few", "several", "said", "says", "per", "via", "onto", "toward", "whose", "whom", "whereas",
    "let", "must", "might", "shall", "itself", "themselves", "himself", "herself", "ourselves",
    "yourself", "myself", "above", "below",
];

fn function_words() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| FUNCTION_WORDS.iter().copied().collect())
}

/// Share of `tokens` that are common English function words.
pub fn function_word_ratio(tokens: &[String]) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::contract("language check needs at least one token"));
    }
    let words = function_words();
    let hits = tokens.iter().filter(|t| words.contains(t.as_str())).count();
    Ok(hits as f64 / tokens.len() as f64)
}

/// Heuristic English filter: true iff at least 5% of tokens are function words.
pub fn is_probably_english(tokens: &[String]) -> Result<bool> {
    Ok(function_word_ratio(tokens)? >= ENGLISH_FUNCTION_WORD_RATIO)
}
