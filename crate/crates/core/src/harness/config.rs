use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::align::DEFAULT_CCA_EPSILON;
use crate::corpus::DEFAULT_TRAIN_FRACTION;
use crate::decompose::{DEFAULT_OVERSAMPLING, DEFAULT_POWER_ITERATIONS};
use crate::error::{Error, Result};
use crate::ranker::DEFAULT_TOP_K;
use crate::vectorspace::{IdfVariant, WeightingScheme, DEFAULT_MAX_DF};

/// T-SVD component counts of the phase-1 and phase-2 grids.
pub const DEFAULT_TSVD_COMPONENTS: [usize; 5] = [100, 200, 400, 800, 1600];
/// CCA dimensions of the phase-2 grid, capped at the component count.
pub const DEFAULT_CCA_DIMS: [usize; 6] = [50, 100, 200, 400, 800, 1600];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    ThresholdOnly,
    Tsvd,
}

impl Reduction {
    pub fn as_str(self) -> &'static str {
        match self {
            Reduction::ThresholdOnly => "threshold_only",
            Reduction::Tsvd => "tsvd",
        }
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reduction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold_only" | "threshold" => Ok(Reduction::ThresholdOnly),
            "tsvd" => Ok(Reduction::Tsvd),
            other => Err(Error::Config(format!("unknown reduction {other:?}"))),
        }
    }
}

/// One end-to-end evaluation setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scheme: WeightingScheme,
    pub reduction: Reduction,
    pub tsvd_k: Option<usize>,
    pub cca_dims: Option<usize>,
    pub max_df: f64,
    pub train_fraction: f64,
    pub seed: u64,
    pub manifest_path: PathBuf,
    pub idf_variant: IdfVariant,
    pub n_iter: usize,
    pub oversampling: usize,
    pub cca_epsilon: f64,
    pub top_k: usize,
}

impl ExperimentConfig {
    pub fn threshold(scheme: WeightingScheme, manifest_path: impl Into<PathBuf>, seed: u64) -> Self {
        ExperimentConfig {
            scheme,
            reduction: Reduction::ThresholdOnly,
            tsvd_k: None,
            cca_dims: None,
            max_df: DEFAULT_MAX_DF,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed,
            manifest_path: manifest_path.into(),
            idf_variant: IdfVariant::Smooth,
            n_iter: DEFAULT_POWER_ITERATIONS,
            oversampling: DEFAULT_OVERSAMPLING,
            cca_epsilon: DEFAULT_CCA_EPSILON,
            top_k: DEFAULT_TOP_K,
        }
    }

    pub fn tsvd(self, k: usize) -> Self {
        ExperimentConfig {
            reduction: Reduction::Tsvd,
            tsvd_k: Some(k),
            ..self
        }
    }

    pub fn cca(self, dims: usize) -> Self {
        ExperimentConfig {
            cca_dims: Some(dims),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        match (self.reduction, self.tsvd_k) {
            (Reduction::Tsvd, None) => return fail("reduction = tsvd requires tsvd_k".into()),
            (Reduction::ThresholdOnly, Some(_)) => return fail("tsvd_k is only valid with reduction = tsvd".into()),
            (_, Some(0)) => return fail("tsvd_k must be at least 1".into()),
            _ => {}
        }
        if let Some(d) = self.cca_dims {
            match self.tsvd_k {
                None => return fail("cca_dims requires reduction = tsvd".into()),
                Some(k) if d > k => return fail(format!("cca_dims {d} exceeds tsvd_k {k}")),
                _ if d == 0 => return fail("cca_dims must be at least 1".into()),
                _ => {}
            }
        }
        if !(self.max_df > 0.0 && self.max_df <= 1.0) {
            return fail(format!("max_df must be in (0, 1], got {}", self.max_df));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return fail(format!("train_fraction must be in (0, 1), got {}", self.train_fraction));
        }
        if !(self.cca_epsilon.is_finite() && self.cca_epsilon >= 0.0) {
            return fail(format!("cca_epsilon must be finite and >= 0, got {}", self.cca_epsilon));
        }
        if self.top_k == 0 {
            return fail("top_k must be at least 1".into());
        }
        Ok(())
    }

    /// Short label naming the representation, used for report file names.
    pub fn label(&self) -> String {
        match (self.tsvd_k, self.cca_dims) {
            (None, _) => format!("{}_threshold", self.scheme),
            (Some(k), None) => format!("{}_tsvd{k}", self.scheme),
            (Some(k), Some(d)) => format!("{}_tsvd{k}_cca{d}", self.scheme),
        }
    }
}

/// The phase-1 grid: every scheme with threshold-only reduction, then every
/// scheme at each T-SVD component count.
pub fn phase_one_grid(base: &ExperimentConfig, schemes: &[WeightingScheme], ks: &[usize]) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for &scheme in schemes {
        out.push(ExperimentConfig {
            scheme,
            reduction: Reduction::ThresholdOnly,
            tsvd_k: None,
            cca_dims: None,
            ..base.clone()
        });
    }
    for &k in ks {
        for &scheme in schemes {
            out.push(ExperimentConfig {
                scheme,
                cca_dims: None,
                ..base.clone()
            }
            .tsvd(k));
        }
    }
    out
}

/// The phase-2 grid: for each component count, T-SVD without CCA followed by
/// every CCA dimension not above the count.
pub fn phase_two_grid(
    base: &ExperimentConfig,
    scheme: WeightingScheme,
    ks: &[usize],
    dims: &[usize],
) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for &k in ks {
        let plain = ExperimentConfig {
            scheme,
            cca_dims: None,
            ..base.clone()
        }
        .tsvd(k);
        out.push(plain.clone());
        out.extend(dims.iter().filter(|&&d| d <= k).map(|&d| plain.clone().cca(d)));
    }
    out
}

/// Settings shared by every experiment in a config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub manifest_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub max_df: Option<f64>,
    pub train_fraction: Option<f64>,
    pub idf_variant: Option<IdfVariant>,
    pub n_iter: Option<usize>,
    pub oversampling: Option<usize>,
    pub cca_epsilon: Option<f64>,
    pub top_k: Option<usize>,
    /// Run grid configurations concurrently.
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub experiment: Vec<ExperimentEntry>,
    pub grid: Option<GridEntry>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentEntry {
    pub scheme: WeightingScheme,
    pub reduction: Reduction,
    pub tsvd_k: Option<usize>,
    pub cca_dims: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    /// 1: schemes × {threshold, T-SVD k}; 2: T-SVD k × CCA dims.
    pub phase: u8,
    pub schemes: Option<Vec<WeightingScheme>>,
    pub tsvd_k: Option<Vec<usize>>,
    pub cca_dims: Option<Vec<usize>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut file = Self::parse(&text)?;
        // Relative manifest paths are resolved against the config's directory.
        if let (Some(m), Some(dir)) = (file.manifest_path.as_mut(), path.parent()) {
            if m.is_relative() {
                *m = dir.join(&*m);
            }
        }
        Ok(file)
    }

    /// The shared settings as a threshold-only TF-IDF config.
    pub fn base(&self, manifest_path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentConfig> {
        let manifest = manifest_path
            .map(Path::to_path_buf)
            .or_else(|| self.manifest_path.clone())
            .ok_or_else(|| Error::Config("no manifest_path given".into()))?;
        let mut base = ExperimentConfig::threshold(WeightingScheme::Tfidf, manifest, seed.or(self.seed).unwrap_or(0));
        if let Some(v) = self.max_df {
            base.max_df = v;
        }
        if let Some(v) = self.train_fraction {
            base.train_fraction = v;
        }
        if let Some(v) = self.idf_variant {
            base.idf_variant = v;
        }
        if let Some(v) = self.n_iter {
            base.n_iter = v;
        }
        if let Some(v) = self.oversampling {
            base.oversampling = v;
        }
        if let Some(v) = self.cca_epsilon {
            base.cca_epsilon = v;
        }
        if let Some(v) = self.top_k {
            base.top_k = v;
        }
        Ok(base)
    }

    /// Every configured experiment: explicit entries first, then the grid.
    pub fn experiments(&self, manifest_path: Option<&Path>, seed: Option<u64>) -> Result<Vec<ExperimentConfig>> {
        let base = self.base(manifest_path, seed)?;
        let mut out: Vec<ExperimentConfig> = self
            .experiment
            .iter()
            .map(|e| ExperimentConfig {
                scheme: e.scheme,
                reduction: e.reduction,
                tsvd_k: e.tsvd_k,
                cca_dims: e.cca_dims,
                ..base.clone()
            })
            .collect();
        if let Some(grid) = &self.grid {
            let ks = grid.tsvd_k.clone().unwrap_or_else(|| DEFAULT_TSVD_COMPONENTS.to_vec());
            match grid.phase {
                1 => {
                    if grid.cca_dims.is_some() {
                        return Err(Error::Config("the phase-1 grid takes no cca_dims".into()));
                    }
                    let schemes = grid.schemes.clone().unwrap_or_else(|| WeightingScheme::ALL.to_vec());
                    out.extend(phase_one_grid(&base, &schemes, &ks));
                }
                2 => {
                    let scheme = match grid.schemes.as_deref() {
                        None => WeightingScheme::Tfidf,
                        Some([s]) => *s,
                        Some(_) => return Err(Error::Config("the phase-2 grid takes a single scheme".into())),
                    };
                    let dims = grid.cca_dims.clone().unwrap_or_else(|| DEFAULT_CCA_DIMS.to_vec());
                    out.extend(phase_two_grid(&base, scheme, &ks, &dims));
                }
                other => return Err(Error::Config(format!("unknown grid phase {other}"))),
            }
        }
        if out.is_empty() {
            return Err(Error::Config("config defines no experiments".into()));
        }
        for config in &out {
            config.validate()?;
        }
        Ok(out)
    }
}
