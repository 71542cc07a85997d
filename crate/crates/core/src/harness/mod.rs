//! Experiment configuration, end-to-end runs, outcome measures, grid reports
//! and the synthetic benchmark corpus.

mod config;
mod experiment;
mod grid;
mod metrics;
mod synth;

pub use config::{
    phase_one_grid, phase_two_grid, ConfigFile, ExperimentConfig, ExperimentEntry, GridEntry, Reduction,
    DEFAULT_CCA_DIMS, DEFAULT_TSVD_COMPONENTS,
};
pub use experiment::{
    run_experiment, CorpusVectors, EvalSummary, EvaluationLayout, ExperimentContext, ExperimentOutcome, RankMetrics,
    ReducedCorpus, RunStatus,
};
pub use grid::{run_grid, GridReport, GridRunner, GRID_CSV_HEADER};
pub use metrics::{median_and_iqr, recall_at_k, recall_curve, CurvePoint, RankQuartiles};
pub use synth::{generate_synthetic, SynthParams};
