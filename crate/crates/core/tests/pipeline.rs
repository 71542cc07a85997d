mod support;

use std::process::Command;

use evlink::corpus::CorpusManifest;
use evlink::decompose::{fit_tsvd, project};
use evlink::harness::{
    generate_synthetic, run_experiment, ExperimentConfig, GridRunner, RunStatus, SynthParams,
};
use evlink::vectorspace::WeightingScheme;

fn small_fixture(seed: u64) -> CorpusManifest {
    generate_synthetic(&SynthParams {
        n_distractors: 120,
        n_pairs: 40,
        seed,
        ..SynthParams::default()
    })
    .unwrap()
}

#[test]
fn projection_matches_oracle_left_singular_vectors() {
    let (sparse, dense) = support::random_sparse(60, 40, 0.15, 9);
    let oracle = support::jacobi_svd(&dense);
    let k = 5;
    let model = fit_tsvd(&sparse, k, 9, 30).unwrap();
    let projected = project(&model, &sparse).unwrap();
    for j in 0..k {
        let column: Vec<f64> = projected.rows().map(|r| r[j]).collect();
        let expected: Vec<f64> = oracle.u[j].iter().map(|u| u * oracle.singular_values[j]).collect();
        let sign = if column.iter().zip(&expected).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        for (a, b) in column.iter().zip(&expected) {
            assert!((a - sign * b).abs() <= 1e-6, "component {j}: {a} vs {}", sign * b);
        }
    }
}

#[test]
fn explained_variance_grows_and_full_rank_reconstructs() {
    let (sparse, dense) = support::random_sparse(30, 12, 0.3, 4);
    let rank = support::jacobi_svd(&dense).singular_values.iter().filter(|s| **s > 1e-9).count();
    let mut previous = 0.0;
    for k in 1..=rank {
        let model = fit_tsvd(&sparse, k, 4, 30).unwrap();
        let ratio = model.explained_variance_ratio(&sparse).unwrap();
        assert!(ratio + 1e-12 >= previous, "k={k}: {ratio} < {previous}");
        previous = ratio;
        if k == rank {
            assert!(model.reconstruction_error(&sparse).unwrap() <= 1e-6);
        }
    }
}

#[test]
fn manifest_round_trips_and_runs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_fixture(1);
    manifest.write_dir(dir.path()).unwrap();
    assert_eq!(CorpusManifest::read_dir(dir.path()).unwrap(), manifest);

    let config = ExperimentConfig::threshold(WeightingScheme::Tfidf, dir.path(), 1).tsvd(20);
    let first = run_experiment(&config).unwrap();
    let second = run_experiment(&config).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.status, RunStatus::Ok);
    assert_eq!(first.pool_size, 120 + first.n_queries);
}

#[test]
fn grid_row_equals_single_run() {
    let dir = tempfile::tempdir().unwrap();
    small_fixture(2).write_dir(dir.path()).unwrap();
    let config = ExperimentConfig::threshold(WeightingScheme::Binary, dir.path(), 2).tsvd(15).cca(5);
    let single = run_experiment(&config).unwrap();
    let report = GridRunner::new().run(std::slice::from_ref(&config)).unwrap();
    assert_eq!(report.summaries, vec![single]);
}

#[test]
fn too_many_cca_dimensions_fail_softly() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_fixture(3);
    let train = manifest.split.train_len();
    manifest.write_dir(dir.path()).unwrap();
    let config = ExperimentConfig::threshold(WeightingScheme::Tfidf, dir.path(), 3).tsvd(train + 5).cca(train + 1);
    let summary = run_experiment(&config).unwrap();
    assert_eq!(summary.status, RunStatus::CcaFailed);
    assert!(summary.metrics.is_none());
}

#[test]
fn cli_runs_synth_rank_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest");
    let run = |args: &[&str]| {
        let status = Command::new(env!("CARGO_BIN_EXE_evlink"))
            .args(args)
            .env("RUST_LOG", "warn")
            .status()
            .unwrap();
        assert!(status.success(), "evlink {args:?} failed");
    };
    let path = |p: &std::path::Path| p.to_str().unwrap().to_string();
    run(&["--seed", "5", "--out", &path(&manifest), "synth", "--n-distractors", "80", "--n-pairs", "30"]);
    let out = dir.path().join("run");
    run(&["--out", &path(&out), "rank", "--manifest", &path(&manifest), "--tsvd-k", "10"]);
    assert!(out.join("rankings.jsonl").exists() && out.join("summary.json").exists());
    let eval = dir.path().join("eval");
    run(&["--out", &path(&eval), "eval", "--rankings", &path(&out.join("rankings.jsonl"))]);
    let curve = std::fs::read_to_string(eval.join("curve.csv")).unwrap();
    assert!(curve.starts_with("k,recall\n"));
    assert!(curve.trim_end().ends_with(",1"));
}
