use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sparse::SparseVector;
use crate::corpus::Document;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DF: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightingScheme {
    Binary,
    Tf,
    Tfidf,
}

impl WeightingScheme {
    pub const ALL: [WeightingScheme; 3] = [WeightingScheme::Binary, WeightingScheme::Tf, WeightingScheme::Tfidf];

    pub fn as_str(self) -> &'static str {
        match self {
            WeightingScheme::Binary => "binary",
            WeightingScheme::Tf => "tf",
            WeightingScheme::Tfidf => "tfidf",
        }
    }
}

impl fmt::Display for WeightingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(WeightingScheme::Binary),
            "tf" => Ok(WeightingScheme::Tf),
            "tfidf" | "tf-idf" => Ok(WeightingScheme::Tfidf),
            other => Err(Error::Config(format!("unknown weighting scheme {other:?}"))),
        }
    }
}

/// Inverse document frequency formula used by the TF-IDF scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdfVariant {
    /// `ln((1 + n_docs) / (1 + df)) + 1`, strictly positive.
    #[default]
    Smooth,
    /// `ln(n_docs / df)`; zero for a term present in every document.
    Raw,
}

impl FromStr for IdfVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(IdfVariant::Smooth),
            "raw" => Ok(IdfVariant::Raw),
            other => Err(Error::Config(format!("unknown idf variant {other:?}"))),
        }
    }
}

/// Shared term index over a fitted corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
    doc_freq: Vec<u64>,
    idf: Vec<f64>,
    n_docs: u64,
    max_df: f64,
    idf_variant: IdfVariant,
}

impl Vocabulary {
    /// Assemble a vocabulary from already-computed statistics. Terms are
    /// re-sorted so indices follow term order.
    pub fn from_parts(
        terms_with_df: Vec<(String, u64)>,
        n_docs: u64,
        max_df: f64,
        idf_variant: IdfVariant,
    ) -> Result<Self> {
        if n_docs == 0 {
            return Err(Error::contract("vocabulary needs at least one fitted document"));
        }
        let sorted: BTreeMap<String, u64> = terms_with_df.into_iter().collect();
        if let Some((t, df)) = sorted.iter().find(|(_, df)| **df == 0 || **df > n_docs) {
            return Err(Error::contract(format!(
                "document frequency {df} of {t:?} outside 1..={n_docs}"
            )));
        }
        let (terms, doc_freq): (Vec<String>, Vec<u64>) = sorted.into_iter().unzip();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let idf = doc_freq.iter().map(|&df| idf_value(idf_variant, n_docs, df)).collect();
        Ok(Vocabulary {
            terms,
            index,
            doc_freq,
            idf,
            n_docs,
            max_df,
            idf_variant,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, index: u32) -> u64 {
        self.doc_freq[index as usize]
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn max_df(&self) -> f64 {
        self.max_df
    }

    pub fn idf_variant(&self) -> IdfVariant {
        self.idf_variant
    }

    pub fn with_idf_variant(mut self, variant: IdfVariant) -> Self {
        self.idf_variant = variant;
        self.idf = self
            .doc_freq
            .iter()
            .map(|&df| idf_value(variant, self.n_docs, df))
            .collect();
        self
    }

    pub fn idf(&self, index: u32) -> f64 {
        self.idf[index as usize]
    }
}

fn idf_value(variant: IdfVariant, n_docs: u64, df: u64) -> f64 {
    let (n, df) = (n_docs as f64, df as f64);
    match variant {
        IdfVariant::Smooth => ((1.0 + n) / (1.0 + df)).ln() + 1.0,
        IdfVariant::Raw => (n / df).ln(),
    }
}

/// Sublinear TF-IDF weight for a term seen `tf >= 1` times.
pub fn tfidf_weight(tf: u32, idf: f64) -> f64 {
    (1.0 + f64::from(tf).ln()) * idf
}

/// Terms present in at least one article and at least one webpage, whose
/// document frequency over the combined collections is at most `max_df` of
/// all documents.
pub fn build_vocabulary<'a>(
    articles: impl IntoIterator<Item = &'a Document>,
    webpages: impl IntoIterator<Item = &'a Document>,
    max_df: f64,
) -> Result<Vocabulary> {
    if !(max_df > 0.0 && max_df <= 1.0) {
        return Err(Error::contract(format!("max_df must be in (0, 1], got {max_df}")));
    }
    let articles: Vec<&Document> = articles.into_iter().collect();
    let webpages: Vec<&Document> = webpages.into_iter().collect();
    if articles.is_empty() || webpages.is_empty() {
        return Err(Error::contract("vocabulary needs non-empty article and webpage collections"));
    }

    let article_df = document_frequencies(&articles);
    let webpage_df = document_frequencies(&webpages);
    let n_docs = (articles.len() + webpages.len()) as u64;

    let terms: Vec<(String, u64)> = article_df
        .iter()
        .filter_map(|(term, &a)| {
            let w = *webpage_df.get(term)?;
            let df = a + w;
            (df as f64 / n_docs as f64 <= max_df).then(|| (term.to_string(), df))
        })
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Vocabulary::from_parts(terms, n_docs, max_df, IdfVariant::Smooth)
}

fn document_frequencies<'a>(docs: &[&'a Document]) -> HashMap<&'a str, u64> {
    docs.par_iter()
        .fold(HashMap::new, |mut acc: HashMap<&'a str, u64>, doc| {
            let unique: HashSet<&str> = doc.tokens().iter().map(String::as_str).collect();
            for t in unique {
                *acc.entry(t).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (t, n) in b {
                *a.entry(t).or_default() += n;
            }
            a
        })
}

/// Weighted term vector of one document; out-of-vocabulary tokens are ignored.
pub fn vectorize(doc: &Document, vocab: &Vocabulary, scheme: WeightingScheme) -> SparseVector {
    vectorize_tokens(doc.tokens(), vocab, scheme)
}

pub fn vectorize_tokens(tokens: &[String], vocab: &Vocabulary, scheme: WeightingScheme) -> SparseVector {
    let mut ids: Vec<u32> = tokens.iter().filter_map(|t| vocab.index_of(t)).collect();
    ids.sort_unstable();

    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut run = ids.as_slice();
    while let Some(&first) = run.first() {
        let count = run.iter().take_while(|&&i| i == first).count();
        run = &run[count..];
        let value = match scheme {
            WeightingScheme::Binary => 1.0,
            WeightingScheme::Tf => count as f64,
            WeightingScheme::Tfidf => tfidf_weight(count as u32, vocab.idf(first)),
        };
        if value != 0.0 {
            indices.push(first);
            values.push(value);
        }
    }
    SparseVector::from_sorted_unchecked(vocab.len(), indices, values)
}

/// [`vectorize`] over a collection, preserving order.
pub fn vectorize_corpus<'a>(
    docs: impl IntoParallelIterator<Item = &'a Document>,
    vocab: &Vocabulary,
    scheme: WeightingScheme,
) -> Vec<SparseVector> {
    docs.into_par_iter().map(|d| vectorize(d, vocab, scheme)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DocumentKind;
    use proptest::prelude::*;

    fn art(text: &str) -> Document {
        Document::new(text, DocumentKind::Article, text)
    }

    fn web(text: &str) -> Document {
        Document::new(text, DocumentKind::Webpage, text)
    }

    #[test]
    fn intersection_rule() {
        let v = build_vocabulary(&[art("a b")], &[web("b c")], 1.0).unwrap();
        assert_eq!(v.terms(), ["b"]);
        assert_eq!(v.doc_freq(0), 2);
        assert_eq!(v.n_docs(), 2);
    }

    #[test]
    fn max_df_excludes_common_terms() {
        // "x" is in 9 of 10 documents; "y" in 2 of 10.
        let mut arts: Vec<Document> = (0..5).map(|i| art(&format!("x a{i}"))).collect();
        arts[0] = art("x y");
        let mut webs: Vec<Document> = (0..4).map(|i| web(&format!("x w{i}"))).collect();
        webs.push(web("y"));
        let v = build_vocabulary(&arts, &webs, 0.85).unwrap();
        assert_eq!(v.terms(), ["y"]);
        let v = build_vocabulary(&arts, &webs, 0.9).unwrap();
        assert_eq!(v.terms(), ["x", "y"]);
    }

    #[test]
    fn empty_intersection_is_an_error() {
        assert!(matches!(
            build_vocabulary(&[art("a")], &[web("b")], 0.85),
            Err(Error::EmptyVocabulary)
        ));
        assert!(matches!(build_vocabulary(&[], &[web("b")], 0.85), Err(Error::Contract(_))));
        assert!(matches!(build_vocabulary(&[art("a")], &[web("a")], 0.0), Err(Error::Contract(_))));
    }

    #[test]
    fn schemes() {
        let vocab = Vocabulary::from_parts(vec![("a".into(), 1), ("b".into(), 2)], 2, 1.0, IdfVariant::Smooth).unwrap();
        let d = art("a a b");
        let bin = vectorize(&d, &vocab, WeightingScheme::Binary);
        assert_eq!(bin.iter().collect::<Vec<_>>(), vec![(0, 1.0), (1, 1.0)]);
        let tf = vectorize(&d, &vocab, WeightingScheme::Tf);
        assert_eq!(tf.iter().collect::<Vec<_>>(), vec![(0, 2.0), (1, 1.0)]);
        let tfidf = vectorize(&d, &vocab, WeightingScheme::Tfidf);
        // (1 + ln 2) * (ln(3/2) + 1), evaluated independently.
        assert!((tfidf.get(0) - 2.3796592851687173).abs() < 1e-12);
        assert!((tfidf.get(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn raw_idf_drops_ubiquitous_terms() {
        let vocab = Vocabulary::from_parts(vec![("a".into(), 2), ("b".into(), 1)], 2, 1.0, IdfVariant::Raw).unwrap();
        let v = vectorize(&art("a b"), &vocab, WeightingScheme::Tfidf);
        assert_eq!(v.indices(), [1]);
        assert!((v.values()[0] - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn out_of_vocabulary_yields_zero_vector() {
        let vocab = Vocabulary::from_parts(vec![("a".into(), 1)], 1, 1.0, IdfVariant::Smooth).unwrap();
        let v = vectorize(&art("zzz qqq"), &vocab, WeightingScheme::Tfidf);
        assert!(v.is_zero());
        assert_eq!(v.dim(), 1);
    }

    #[test]
    fn corpus_order_preserved() {
        let vocab = Vocabulary::from_parts(vec![("a".into(), 1), ("b".into(), 1)], 2, 1.0, IdfVariant::Smooth).unwrap();
        assert!(vectorize_corpus(&Vec::<Document>::new(), &vocab, WeightingScheme::Tf).is_empty());
        let docs = [art("b"), art("a")];
        let out = vectorize_corpus(&docs, &vocab, WeightingScheme::Tf);
        assert_eq!(out[0].indices(), [1]);
        assert_eq!(out[1].indices(), [0]);
    }

    fn docs_strategy() -> impl Strategy<Value = (Vec<Vec<u8>>, Vec<Vec<u8>>)> {
        let doc = proptest::collection::vec(0u8..12, 1..15);
        (
            proptest::collection::vec(doc.clone(), 1..8),
            proptest::collection::vec(doc, 1..8),
        )
    }

    fn render(kind: DocumentKind, ids: &[u8], n: usize) -> Document {
        let text = ids.iter().map(|i| format!("t{i}")).collect::<Vec<_>>().join(" ");
        Document::new(format!("{kind}{n}"), kind, text)
    }

    proptest! {
        #[test]
        fn scheme_supports_agree_and_weights_are_positive((a, w) in docs_strategy()) {
            let arts: Vec<_> = a.iter().enumerate().map(|(n, d)| render(DocumentKind::Article, d, n)).collect();
            let webs: Vec<_> = w.iter().enumerate().map(|(n, d)| render(DocumentKind::Webpage, d, n)).collect();
            let Ok(vocab) = build_vocabulary(&arts, &webs, 1.0) else { return Ok(()); };
            for d in arts.iter().chain(&webs) {
                let b = vectorize(d, &vocab, WeightingScheme::Binary);
                let t = vectorize(d, &vocab, WeightingScheme::Tf);
                let x = vectorize(d, &vocab, WeightingScheme::Tfidf);
                prop_assert_eq!(b.indices(), t.indices());
                prop_assert_eq!(b.indices(), x.indices());
                prop_assert!(b.values().iter().all(|v| *v == 1.0));
                prop_assert!(t.values().iter().all(|v| *v >= 1.0 && v.fract() == 0.0));
                prop_assert!(x.values().iter().all(|v| *v > 0.0));
            }
        }

        #[test]
        fn vocabulary_is_permutation_invariant((a, w) in docs_strategy(), max_df in 0.3f64..1.0) {
            let arts: Vec<_> = a.iter().enumerate().map(|(n, d)| render(DocumentKind::Article, d, n)).collect();
            let webs: Vec<_> = w.iter().enumerate().map(|(n, d)| render(DocumentKind::Webpage, d, n)).collect();
            let mut arts_rev = arts.clone();
            arts_rev.reverse();
            let mut webs_rev = webs.clone();
            webs_rev.reverse();
            let x = build_vocabulary(&arts, &webs, max_df).ok();
            let y = build_vocabulary(&arts_rev, &webs_rev, max_df).ok();
            prop_assert_eq!(&x, &y);
            if let Some(v) = x {
                for i in 0..v.len() as u32 {
                    prop_assert!(v.doc_freq(i) as f64 / v.n_docs() as f64 <= max_df);
                }
                prop_assert!(v.terms().windows(2).all(|p| p[0] < p[1]));
            }
        }

        #[test]
        fn idf_is_monotone_in_df(n in 1u64..10_000, df1 in 1u64..10_000, df2 in 1u64..10_000, tf in 1u32..50) {
            let (lo, hi) = (df1.min(df2).min(n), df1.max(df2).min(n));
            for variant in [IdfVariant::Smooth, IdfVariant::Raw] {
                let w_lo = tfidf_weight(tf, idf_value(variant, n, lo));
                let w_hi = tfidf_weight(tf, idf_value(variant, n, hi));
                prop_assert!(w_hi <= w_lo);
            }
        }
    }
}
