use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::experiment::{ContextCache, EvalSummary, ExperimentContext, RunStatus};
use crate::corpus::CorpusManifest;
use crate::error::{Error, Result};

pub const GRID_CSV_HEADER: &str =
    "scheme,reduction,tsvd_k,cca_dims,status,n_queries,median_rank,iqr_low,iqr_high,recall_at_1,recall_at_50";

/// Runs experiment configurations over shared, lazily loaded manifests.
pub struct GridRunner {
    cache: ContextCache,
    parallel: bool,
}

impl Default for GridRunner {
    fn default() -> Self {
        Self::new()
    }
}

impl GridRunner {
    pub fn new() -> Self {
        GridRunner {
            cache: ContextCache::new(),
            parallel: false,
        }
    }

    /// Serve `manifest` for configs whose `manifest_path` is `path`.
    pub fn with_manifest(manifest: CorpusManifest, path: impl Into<PathBuf>) -> Self {
        GridRunner {
            cache: ContextCache::with_context(ExperimentContext::new(manifest), path.into()),
            parallel: false,
        }
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    /// Run one config; errors other than CCA non-convergence are returned.
    pub fn run_one(&self, config: &ExperimentConfig) -> Result<EvalSummary> {
        config.validate()?;
        let context = self.cache.get(&config.manifest_path)?;
        Ok(context.run(config)?.summary)
    }

    /// Run every config. A failing config becomes an `error` row and the
    /// grid continues.
    pub fn run(&self, configs: &[ExperimentConfig]) -> Result<GridReport> {
        if configs.is_empty() {
            return Err(Error::contract("a grid needs at least one config"));
        }
        let run = |config: &ExperimentConfig| {
            self.run_one(config).unwrap_or_else(|err| EvalSummary {
                config: config.clone(),
                status: RunStatus::Error,
                n_queries: 0,
                pool_size: 0,
                metrics: None,
                message: Some(err.to_string()),
            })
        };
        let summaries = if self.parallel {
            configs.par_iter().map(run).collect()
        } else {
            configs.iter().map(run).collect()
        };
        Ok(GridReport { summaries })
    }
}

pub fn run_grid(configs: &[ExperimentConfig]) -> Result<GridReport> {
    GridRunner::new().run(configs)
}

/// One summary per config, in config order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub summaries: Vec<EvalSummary>,
}

impl GridReport {
    /// Row identifiers: position plus representation label.
    pub fn row_ids(&self) -> Vec<String> {
        self.summaries
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{i:02}_{}", s.config.label()))
            .collect()
    }

    /// The report table; metric cells are empty unless the row succeeded.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(GRID_CSV_HEADER);
        out.push('\n');
        for s in &self.summaries {
            let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            let mut cells = vec![
                s.config.scheme.to_string(),
                s.config.reduction.to_string(),
                opt(s.config.tsvd_k),
                opt(s.config.cca_dims),
                s.status.as_str().to_string(),
                s.n_queries.to_string(),
            ];
            match &s.metrics {
                Some(m) => cells.extend([
                    m.median_rank.to_string(),
                    m.iqr.0.to_string(),
                    m.iqr.1.to_string(),
                    m.recall_at_1.to_string(),
                    m.recall_at_50.to_string(),
                ]),
                None => cells.extend(std::iter::repeat(String::new()).take(5)),
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Write `grid.csv` and a `curve_<id>.csv` for every successful row.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: String, text: String| {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(path, e))
        };
        write("grid.csv".into(), self.to_csv())?;
        for (id, s) in self.row_ids().into_iter().zip(&self.summaries) {
            if let Some(m) = &s.metrics {
                let mut text = String::from("k,recall\n");
                for p in &m.curve {
                    text.push_str(&format!("{},{}\n", p.k, p.recall));
                }
                write(format!("curve_{id}.csv"), text)?;
            }
        }
        Ok(())
    }
}
