use std::collections::HashMap;
use std::hash::Hash;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, PoisonError};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Reduction};
use super::metrics::{median_and_iqr, recall_at_k, recall_curve, CurvePoint};
use crate::align::{fit_cca, project_side, CcaModel, Side};
use crate::corpus::{index_by_id, split_links, CorpusManifest, Partition, Split};
use crate::decompose::{fit_tsvd_with, project, EmbeddingMatrix, TsvdModel, TsvdParams};
use crate::error::{Error, Result};
use crate::ranker::{rank_all, CandidatePool, Query, RankedResult, VectorRef};
use crate::vectorspace::{build_vocabulary, vectorize_corpus, IdfVariant, SparseVector, Vocabulary, WeightingScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// CCA could not fit the requested number of dimensions.
    CcaFailed,
    /// Any other failure; only produced by grid runs.
    Error,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::CcaFailed => "cca_failed",
            RunStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMetrics {
    pub median_rank: f64,
    pub iqr: (f64, f64),
    pub recall_at_1: f64,
    pub recall_at_50: f64,
    pub curve: Vec<CurvePoint>,
}

impl RankMetrics {
    pub fn from_ranks(ranks: &[usize], pool_size: usize) -> Result<Self> {
        let q = median_and_iqr(ranks)?;
        Ok(RankMetrics {
            median_rank: q.median,
            iqr: (q.q1, q.q3),
            recall_at_1: recall_at_k(ranks, 1)?,
            recall_at_50: recall_at_k(ranks, 50)?,
            curve: recall_curve(ranks, pool_size)?,
        })
    }
}

/// Outcome measures of one experiment; `metrics` is absent unless the run
/// succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub config: ExperimentConfig,
    pub status: RunStatus,
    pub n_queries: usize,
    pub pool_size: usize,
    pub metrics: Option<RankMetrics>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub summary: EvalSummary,
    pub rankings: Vec<RankedResult>,
}

/// Load the manifest named by `config` and run it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvalSummary> {
    config.validate()?;
    let context = ExperimentContext::open(&config.manifest_path)?;
    Ok(context.run(config)?.summary)
}

/// Memoizes per-key values; concurrent callers of one key wait for a single
/// computation. Failed computations are not cached.
struct Memo<K, V> {
    cells: Mutex<HashMap<K, Arc<Mutex<Option<Arc<V>>>>>>,
}

impl<K: Eq + Hash, V> Memo<K, V> {
    fn new() -> Self {
        Memo {
            cells: Mutex::new(HashMap::new()),
        }
    }

    fn get_or_try_init(&self, key: K, init: impl FnOnce() -> Result<V>) -> Result<Arc<V>> {
        let cell = self
            .cells
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
            .entry(key)
            .or_default()
            .clone();
        let mut slot = cell.lock().unwrap_or_else(PoisonError::into_inner);
        if let Some(v) = slot.as_ref() {
            return Ok(Arc::clone(v));
        }
        let v = Arc::new(init()?);
        *slot = Some(Arc::clone(&v));
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SplitKey {
    train_fraction: u64,
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct VocabKey {
    split: SplitKey,
    max_df: u64,
    idf_variant: IdfVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct VectorKey {
    vocab: VocabKey,
    scheme: WeightingScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct TsvdKey {
    vectors: VectorKey,
    k: usize,
    n_iter: usize,
    oversampling: usize,
}

fn keys(config: &ExperimentConfig) -> VectorKey {
    VectorKey {
        vocab: VocabKey {
            split: SplitKey {
                train_fraction: config.train_fraction.to_bits(),
                seed: config.seed,
            },
            max_df: config.max_df.to_bits(),
            idf_variant: config.idf_variant,
        },
        scheme: config.scheme,
    }
}

/// Term vectors of every article and webpage, in manifest order.
#[derive(Debug, Clone)]
pub struct CorpusVectors {
    pub articles: Vec<SparseVector>,
    pub webpages: Vec<SparseVector>,
}

/// A fitted T-SVD with every article and webpage projected.
#[derive(Debug, Clone)]
pub struct ReducedCorpus {
    pub model: TsvdModel,
    pub articles: EmbeddingMatrix,
    pub webpages: EmbeddingMatrix,
}

/// Row indices of the documents an experiment touches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationLayout {
    /// Paired training rows: `(article row, webpage row)` per training link.
    pub train_pairs: Vec<(usize, usize)>,
    /// Test queries: `(webpage row, true article row)` per test link.
    pub test_queries: Vec<(usize, usize)>,
    /// Candidate article rows: test-pair articles and distractors, in
    /// manifest order.
    pub pool: Vec<usize>,
}

/// A loaded manifest plus caches shared by every experiment run on it.
pub struct ExperimentContext {
    manifest: CorpusManifest,
    splits: Memo<SplitKey, Split>,
    vocabularies: Memo<VocabKey, Vocabulary>,
    vectors: Memo<VectorKey, CorpusVectors>,
    reductions: Memo<TsvdKey, ReducedCorpus>,
}

impl ExperimentContext {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(CorpusManifest::read_dir(dir)?))
    }

    pub fn new(manifest: CorpusManifest) -> Self {
        ExperimentContext {
            manifest,
            splits: Memo::new(),
            vocabularies: Memo::new(),
            vectors: Memo::new(),
            reductions: Memo::new(),
        }
    }

    pub fn manifest(&self) -> &CorpusManifest {
        &self.manifest
    }

    /// The manifest's own split when fraction and seed match, else a fresh
    /// seeded split of the same links.
    pub fn split(&self, config: &ExperimentConfig) -> Result<Arc<Split>> {
        let key = keys(config).vocab.split;
        self.splits.get_or_try_init(key, || {
            if config.train_fraction == self.manifest.train_fraction && config.seed == self.manifest.seed {
                Ok(self.manifest.split.clone())
            } else {
                split_links(self.manifest.links(), config.train_fraction, config.seed)
            }
        })
    }

    pub fn layout(&self, config: &ExperimentConfig) -> Result<EvaluationLayout> {
        let split = self.split(config)?;
        let articles = index_by_id(&self.manifest.articles);
        let webpages = index_by_id(&self.manifest.webpages);
        let rows = |article: &str, webpage: &str| -> Result<(usize, usize)> {
            match (articles.get(article), webpages.get(webpage)) {
                (Some(&a), Some(&w)) => Ok((a, w)),
                _ => Err(Error::Validation {
                    message: "link references a document missing from the manifest".into(),
                    ids: vec![format!("{article}->{webpage}")],
                }),
            }
        };
        let mut layout = EvaluationLayout {
            train_pairs: Vec::new(),
            test_queries: Vec::new(),
            pool: Vec::new(),
        };
        let mut in_training = vec![false; self.manifest.articles.len()];
        for (link, part) in split.links.iter().zip(&split.assignments) {
            let (a, w) = rows(&link.article_id, &link.webpage_id)?;
            match part {
                Partition::Train => {
                    in_training[a] = true;
                    layout.train_pairs.push((a, w));
                }
                Partition::Test => layout.test_queries.push((w, a)),
            }
        }
        layout.pool = (0..in_training.len()).filter(|&i| !in_training[i]).collect();
        Ok(layout)
    }

    /// Vocabulary fitted on all articles and the training webpages.
    pub fn vocabulary(&self, config: &ExperimentConfig) -> Result<Arc<Vocabulary>> {
        let key = keys(config).vocab;
        self.vocabularies.get_or_try_init(key, || {
            let layout = self.layout(config)?;
            let pages = layout.train_pairs.iter().map(|&(_, w)| &self.manifest.webpages[w]);
            let vocab = build_vocabulary(&self.manifest.articles, pages, config.max_df)?;
            Ok(vocab.with_idf_variant(config.idf_variant))
        })
    }

    pub fn vectors(&self, config: &ExperimentConfig) -> Result<Arc<CorpusVectors>> {
        self.vectors.get_or_try_init(keys(config), || {
            let vocab = self.vocabulary(config)?;
            Ok(CorpusVectors {
                articles: vectorize_corpus(&self.manifest.articles, &vocab, config.scheme),
                webpages: vectorize_corpus(&self.manifest.webpages, &vocab, config.scheme),
            })
        })
    }

    /// T-SVD fitted on the training articles stacked over the training
    /// webpages; `None` for threshold-only configs.
    pub fn reduction(&self, config: &ExperimentConfig) -> Result<Option<Arc<ReducedCorpus>>> {
        let (Reduction::Tsvd, Some(k)) = (config.reduction, config.tsvd_k) else {
            return Ok(None);
        };
        let key = TsvdKey {
            vectors: keys(config),
            k,
            n_iter: config.n_iter,
            oversampling: config.oversampling,
        };
        self.reductions
            .get_or_try_init(key, || {
                let vectors = self.vectors(config)?;
                let layout = self.layout(config)?;
                let stack: Vec<SparseVector> = layout
                    .train_pairs
                    .iter()
                    .map(|&(a, _)| vectors.articles[a].clone())
                    .chain(layout.train_pairs.iter().map(|&(_, w)| vectors.webpages[w].clone()))
                    .collect();
                let params = TsvdParams {
                    k,
                    oversampling: config.oversampling,
                    n_iter: config.n_iter,
                    seed: config.seed,
                };
                let model = fit_tsvd_with(&stack, params)?;
                Ok(ReducedCorpus {
                    articles: project(&model, &vectors.articles)?,
                    webpages: project(&model, &vectors.webpages)?,
                    model,
                })
            })
            .map(Some)
    }

    /// CCA fitted on the reduced training pairs; `None` without `cca_dims`.
    pub fn cca(&self, config: &ExperimentConfig) -> Result<Option<CcaModel>> {
        let Some(d) = config.cca_dims else {
            return Ok(None);
        };
        let reduced = self
            .reduction(config)?
            .ok_or_else(|| Error::Config("cca_dims requires reduction = tsvd".into()))?;
        let layout = self.layout(config)?;
        let pages: Vec<usize> = layout.train_pairs.iter().map(|&(_, w)| w).collect();
        let articles: Vec<usize> = layout.train_pairs.iter().map(|&(a, _)| a).collect();
        fit_cca(
            &reduced.webpages.select_rows(&pages),
            &reduced.articles.select_rows(&articles),
            d,
            config.cca_epsilon,
        )
        .map(Some)
    }

    pub fn run(&self, config: &ExperimentConfig) -> Result<ExperimentOutcome> {
        config.validate()?;
        let layout = self.layout(config)?;
        let mut summary = EvalSummary {
            config: config.clone(),
            status: RunStatus::Ok,
            n_queries: layout.test_queries.len(),
            pool_size: layout.pool.len(),
            metrics: None,
            message: None,
        };
        if layout.test_queries.is_empty() {
            return Err(Error::contract("the split has no test links"));
        }

        let article_ids = |rows: &[usize]| -> Vec<String> {
            rows.iter().map(|&i| self.manifest.articles[i].id().to_string()).collect()
        };
        let pool_ids = article_ids(&layout.pool);
        let tag = config.label();

        let vectors = self.vectors(config)?;
        let (pool, query_rows) = match self.reduction(config)? {
            None => {
                let rows: Vec<SparseVector> = layout.pool.iter().map(|&i| vectors.articles[i].clone()).collect();
                (CandidatePool::sparse(pool_ids, &rows, tag)?, None)
            }
            Some(reduced) => {
                let page_rows: Vec<usize> = layout.test_queries.iter().map(|&(w, _)| w).collect();
                let mut pages = reduced.webpages.select_rows(&page_rows);
                let mut candidates = reduced.articles.select_rows(&layout.pool);
                match self.cca(config) {
                    Ok(None) => {}
                    Ok(Some(model)) => {
                        pages = project_side(&model, Side::Webpage, &pages)?;
                        candidates = project_side(&model, Side::Article, &candidates)?;
                    }
                    Err(err @ Error::CcaNotConverged { .. }) => {
                        summary.status = RunStatus::CcaFailed;
                        summary.message = Some(err.to_string());
                        return Ok(ExperimentOutcome {
                            summary,
                            rankings: Vec::new(),
                        });
                    }
                    Err(err) => return Err(err),
                }
                (CandidatePool::dense(pool_ids, candidates, tag)?, Some(pages))
            }
        };

        let queries: Vec<Query<'_>> = layout
            .test_queries
            .iter()
            .enumerate()
            .map(|(q, &(w, a))| Query {
                id: self.manifest.webpages[w].id(),
                true_id: self.manifest.articles[a].id(),
                vector: match &query_rows {
                    None => VectorRef::Sparse(&vectors.webpages[w]),
                    Some(m) => VectorRef::Dense(m.row(q)),
                },
            })
            .collect();
        let rankings = rank_all(&queries, &pool, config.top_k)?;
        let ranks: Vec<usize> = rankings.iter().map(|r| r.true_rank).collect();
        summary.metrics = Some(RankMetrics::from_ranks(&ranks, pool.len())?);
        Ok(ExperimentOutcome { summary, rankings })
    }
}

/// Contexts keyed by manifest path, opened on first use.
pub(crate) struct ContextCache {
    contexts: Memo<PathBuf, ExperimentContext>,
}

impl ContextCache {
    pub(crate) fn new() -> Self {
        ContextCache { contexts: Memo::new() }
    }

    pub(crate) fn with_context(context: ExperimentContext, path: PathBuf) -> Self {
        let cache = Self::new();
        cache
            .contexts
            .get_or_try_init(path, || Ok(context))
            .expect("infallible initializer");
        cache
    }

    pub(crate) fn get(&self, path: &Path) -> Result<Arc<ExperimentContext>> {
        self.contexts
            .get_or_try_init(path.to_path_buf(), || ExperimentContext::open(path))
    }
}
