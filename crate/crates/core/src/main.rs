use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use evlink::align::encode_cca;
use evlink::corpus::{
    build_manifest, dedup_webpages, import_pubmed_xml, parse_documents_jsonl, parse_links_csv, write_documents_jsonl,
    write_split_csv, CorpusManifest, DedupParams, Document, DocumentKind, IngestParams, Representative,
    DEFAULT_DEDUP_FRACTION, DEFAULT_TRAIN_FRACTION, MIN_WORDS,
};
use evlink::decompose::encode_tsvd;
use evlink::harness::{
    ConfigFile, EvalSummary, ExperimentConfig, ExperimentContext, GridRunner, RankMetrics, Reduction, RunStatus,
    SynthParams, DEFAULT_CCA_DIMS, DEFAULT_TSVD_COMPONENTS,
};
use evlink::ranker::{parse_rankings_jsonl, write_rankings_jsonl};
use evlink::vectorspace::{encode_sparse_vectors, vocab_meta, write_sparse_jsonl, write_vocab_tsv, IdfVariant, WeightingScheme};

/// Rank candidate research articles for webpages that report on them.
#[derive(Parser)]
#[command(name = "evlink", version)]
struct Cli {
    /// Seed for splits, T-SVD and the synthetic generator.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML experiment or grid configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a manifest from article XML/JSONL, webpage JSONL and a links CSV.
    Ingest(IngestArgs),
    /// Collapse near-duplicate webpages that share a linked article.
    Dedup(DedupArgs),
    /// Re-split a manifest's links into train and test.
    Split(SplitArgs),
    /// Write the vocabulary and sparse vectors of a manifest.
    Vectorize(VectorizeArgs),
    /// Fit a T-SVD on the training documents.
    FitTsvd(FitArgs),
    /// Fit a T-SVD and a CCA on the training pairs.
    FitCca(FitArgs),
    /// Rank the pool for every test webpage.
    Rank(ExperimentArgs),
    /// Summarize a rankings file.
    Eval(EvalArgs),
    /// Run a grid of experiments and write the report table.
    Grid(GridArgs),
    /// Generate the synthetic benchmark corpus.
    Synth(SynthArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// PubMed efetch XML (`.xml`) or document JSONL.
    #[arg(long)]
    articles: PathBuf,
    /// Webpage document JSONL; text may be HTML.
    #[arg(long)]
    webpages: PathBuf,
    /// CSV with header `article_id,webpage_id`.
    #[arg(long)]
    links: PathBuf,
    #[arg(long, default_value_t = MIN_WORDS)]
    min_words: usize,
    #[arg(long, default_value_t = DEFAULT_DEDUP_FRACTION)]
    dedup_fraction: f64,
    #[arg(long)]
    no_english_filter: bool,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    train_fraction: f64,
}

#[derive(Args)]
struct DedupArgs {
    #[arg(long)]
    webpages: PathBuf,
    #[arg(long)]
    links: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DEDUP_FRACTION)]
    fraction: f64,
    /// Pick representatives in seeded random order instead of longest first.
    #[arg(long)]
    random_representative: bool,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    train_fraction: f64,
}

#[derive(Args)]
struct VectorizeArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "tfidf")]
    scheme: WeightingScheme,
    #[arg(long)]
    max_df: Option<f64>,
    #[arg(long)]
    idf_variant: Option<IdfVariant>,
    /// Also write JSONL debug dumps of the vectors.
    #[arg(long)]
    jsonl: bool,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "tfidf")]
    scheme: WeightingScheme,
    #[arg(long)]
    k: usize,
    /// CCA dimensions (fit-cca only).
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<WeightingScheme>,
    #[arg(long)]
    tsvd_k: Option<usize>,
    #[arg(long)]
    cca_dims: Option<usize>,
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    rankings: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Built-in grid when no config is given: 1 (schemes x reductions) or 2 (T-SVD x CCA).
    #[arg(long)]
    phase: Option<u8>,
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = SynthParams::default().n_distractors)]
    n_distractors: usize,
    #[arg(long, default_value_t = SynthParams::default().n_pairs)]
    n_pairs: usize,
    #[arg(long, default_value_t = SynthParams::default().rho)]
    rho: f64,
    #[arg(long, default_value_t = SynthParams::default().train_fraction)]
    train_fraction: f64,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let seed = cli.seed;
    let config = cli.config.as_deref();
    let out = cli.out.as_path();
    match cli.command {
        Command::Ingest(args) => ingest(args, seed.unwrap_or(0), out),
        Command::Dedup(args) => dedup(args, seed.unwrap_or(0), out),
        Command::Split(args) => split(args, seed.unwrap_or(0), out),
        Command::Vectorize(args) => vectorize(args, seed, out),
        Command::FitTsvd(args) => fit(args, false, seed, out),
        Command::FitCca(args) => fit(args, true, seed, out),
        Command::Rank(args) => rank(args, config, seed, out),
        Command::Eval(args) => eval(args, out),
        Command::Grid(args) => grid(args, config, seed, out),
        Command::Synth(args) => synth(args, seed.unwrap_or(0), out),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<()> {
    let mut out = create(dir, name)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn read_documents(path: &Path, kind: DocumentKind) -> Result<Vec<Document>> {
    let is_xml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml"));
    let docs = if is_xml {
        let import = import_pubmed_xml(path)?;
        if import.skipped_missing_pmid > 0 {
            info!("skipped {} records without a PMID", import.skipped_missing_pmid);
        }
        import.documents
    } else {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        parse_documents_jsonl(BufReader::new(file))?
    };
    if let Some(d) = docs.iter().find(|d| d.kind() != kind) {
        bail!("{}: document {} is not of kind {kind}", path.display(), d.id());
    }
    Ok(docs)
}

fn read_links(path: &Path) -> Result<Vec<evlink::corpus::RawLink>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(parse_links_csv(BufReader::new(file))?)
}

fn ingest(args: IngestArgs, seed: u64, out: &Path) -> Result<()> {
    let articles = read_documents(&args.articles, DocumentKind::Article)?;
    let webpages = read_documents(&args.webpages, DocumentKind::Webpage)?;
    let links = read_links(&args.links)?;
    let params = IngestParams {
        min_words: args.min_words,
        dedup: DedupParams {
            fraction: args.dedup_fraction,
            ..DedupParams::default()
        },
        english_filter: !args.no_english_filter,
        train_fraction: args.train_fraction,
        seed,
    };
    let (manifest, report) = build_manifest(articles, webpages, &links, params)?;
    manifest.write_dir(out)?;
    info!("ingest: {report:?}");
    info!("manifest written to {} ({:?})", out.display(), manifest.counts());
    Ok(())
}

fn dedup(args: DedupArgs, seed: u64, out: &Path) -> Result<()> {
    let webpages = read_documents(&args.webpages, DocumentKind::Webpage)?;
    let links = read_links(&args.links)?;
    let params = DedupParams {
        fraction: args.fraction,
        representative: if args.random_representative {
            Representative::Random { seed }
        } else {
            Representative::Longest
        },
        ..DedupParams::default()
    };
    let outcome = dedup_webpages(&webpages, &links, params)?;
    let mut pages = create(out, "webpages.jsonl")?;
    write_documents_jsonl(&mut pages, &outcome.retained)?;
    pages.flush()?;
    let mut report = csv::Writer::from_writer(create(out, "dedup.csv")?);
    report.write_record(["dropped", "kept"])?;
    for (dropped, kept) in &outcome.dropped {
        report.write_record([dropped, kept])?;
    }
    report.flush()?;
    info!(
        "retained {} of {} webpages; {} residual overlaps above threshold",
        outcome.retained.len(),
        webpages.len(),
        outcome.residual_violations.len()
    );
    Ok(())
}

fn split(args: SplitArgs, seed: u64, out: &Path) -> Result<()> {
    let mut manifest = CorpusManifest::read_dir(&args.manifest)?;
    manifest.resplit(args.train_fraction, seed)?;
    if out == args.manifest {
        manifest.write_dir(out)?;
    } else {
        write_split_csv(create(out, "split.csv")?, &manifest.split)?;
    }
    info!("split: {} train, {} test", manifest.split.train_len(), manifest.counts().test);
    Ok(())
}

fn base_config(manifest: &Path, scheme: WeightingScheme, seed: Option<u64>) -> Result<ExperimentConfig> {
    let context_seed = match seed {
        Some(s) => s,
        None => CorpusManifest::read_dir(manifest)?.seed,
    };
    Ok(ExperimentConfig::threshold(scheme, manifest, context_seed))
}

fn vectorize(args: VectorizeArgs, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut config = base_config(&args.manifest, args.scheme, seed)?;
    if let Some(v) = args.max_df {
        config.max_df = v;
    }
    if let Some(v) = args.idf_variant {
        config.idf_variant = v;
    }
    let context = ExperimentContext::open(&args.manifest)?;
    let vocab = context.vocabulary(&config)?;
    let vectors = context.vectors(&config)?;

    let mut tsv = create(out, "vocab.tsv")?;
    write_vocab_tsv(&mut tsv, &vocab)?;
    tsv.flush()?;
    write_json(out, "vocab.meta.json", &vocab_meta(&vocab))?;
    let manifest = context.manifest();
    for (name, rows, docs) in [
        ("articles", &vectors.articles, &manifest.articles),
        ("webpages", &vectors.webpages, &manifest.webpages),
    ] {
        fs::write(out.join(format!("{name}.evsp")), encode_sparse_vectors(rows, vocab.len())?)?;
        if args.jsonl {
            let ids: Vec<String> = docs.iter().map(|d| d.id().to_string()).collect();
            let mut w = create(out, &format!("{name}.jsonl"))?;
            write_sparse_jsonl(&mut w, rows, Some(&ids))?;
            w.flush()?;
        }
    }
    info!("vocabulary of {} terms written to {}", vocab.len(), out.display());
    Ok(())
}

fn fit(args: FitArgs, with_cca: bool, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut config = base_config(&args.manifest, args.scheme, seed)?.tsvd(args.k);
    if let Some(n) = args.n_iter {
        config.n_iter = n;
    }
    if let Some(e) = args.epsilon {
        config.cca_epsilon = e;
    }
    if with_cca {
        let Some(d) = args.dims else {
            bail!("fit-cca requires --dims");
        };
        config = config.cca(d);
    }
    config.validate()?;
    let context = ExperimentContext::open(&args.manifest)?;
    let reduced = context.reduction(&config)?.expect("tsvd config");
    fs::create_dir_all(out)?;
    fs::write(out.join("tsvd.bin"), encode_tsvd(&reduced.model))?;
    info!("tsvd: singular values {:?}", &reduced.model.singular_values()[..reduced.model.k().min(5)]);
    if with_cca {
        let model = context.cca(&config)?.expect("cca config");
        fs::write(out.join("cca.bin"), encode_cca(&model))?;
        info!("cca: correlations {:?}", &model.correlations()[..model.d().min(5)]);
    }
    Ok(())
}

fn single_experiment(args: &ExperimentArgs, config_path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut config = match config_path {
        Some(path) => {
            let configs = ConfigFile::read(path)?.experiments(args.manifest.as_deref(), seed)?;
            match <[ExperimentConfig; 1]>::try_from(configs) {
                Ok([c]) => c,
                Err(v) => bail!("{} defines {} experiments; rank needs exactly one", path.display(), v.len()),
            }
        }
        None => {
            let Some(manifest) = args.manifest.as_deref() else {
                bail!("give --manifest or --config");
            };
            base_config(manifest, WeightingScheme::Tfidf, seed)?
        }
    };
    if let Some(s) = args.scheme {
        config.scheme = s;
    }
    if let Some(k) = args.tsvd_k {
        config.reduction = Reduction::Tsvd;
        config.tsvd_k = Some(k);
    }
    if let Some(d) = args.cca_dims {
        config.cca_dims = Some(d);
    }
    if let Some(k) = args.top_k {
        config.top_k = k;
    }
    config.validate()?;
    Ok(config)
}

fn log_summary(s: &EvalSummary) {
    match (&s.metrics, s.status) {
        (Some(m), _) => info!(
            "{}: median rank {} ({}-{}), recall@1 {:.3}, recall@50 {:.3}, {} queries, pool {}",
            s.config.label(),
            m.median_rank,
            m.iqr.0,
            m.iqr.1,
            m.recall_at_1,
            m.recall_at_50,
            s.n_queries,
            s.pool_size
        ),
        (None, status) => info!(
            "{}: {} {}",
            s.config.label(),
            status.as_str(),
            s.message.as_deref().unwrap_or("")
        ),
    }
}

fn rank(args: ExperimentArgs, config_path: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let config = single_experiment(&args, config_path, seed)?;
    let context = ExperimentContext::open(&config.manifest_path)?;
    let outcome = context.run(&config)?;
    let mut w = create(out, "rankings.jsonl")?;
    write_rankings_jsonl(&mut w, &outcome.rankings)?;
    w.flush()?;
    write_json(out, "summary.json", &outcome.summary)?;
    log_summary(&outcome.summary);
    if outcome.summary.status == RunStatus::CcaFailed {
        bail!("CCA did not converge");
    }
    Ok(())
}

fn eval(args: EvalArgs, out: &Path) -> Result<()> {
    let file = File::open(&args.rankings).with_context(|| format!("opening {}", args.rankings.display()))?;
    let rankings = parse_rankings_jsonl(BufReader::new(file))?;
    let Some(pool_size) = rankings.first().map(|r| r.pool_size) else {
        bail!("{} holds no rankings", args.rankings.display());
    };
    if rankings.iter().any(|r| r.pool_size != pool_size) {
        bail!("rankings disagree on the pool size");
    }
    let ranks: Vec<usize> = rankings.iter().map(|r| r.true_rank).collect();
    let metrics = RankMetrics::from_ranks(&ranks, pool_size)?;
    let mut curve = create(out, "curve.csv")?;
    writeln!(curve, "k,recall")?;
    for p in &metrics.curve {
        writeln!(curve, "{},{}", p.k, p.recall)?;
    }
    curve.flush()?;
    info!(
        "median rank {} ({}-{}), recall@1 {:.3}, recall@50 {:.3}, {} queries",
        metrics.median_rank,
        metrics.iqr.0,
        metrics.iqr.1,
        metrics.recall_at_1,
        metrics.recall_at_50,
        ranks.len()
    );
    write_json(out, "metrics.json", &metrics)?;
    Ok(())
}

fn grid(args: GridArgs, config_path: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let (configs, parallel) = match config_path {
        Some(path) => {
            let file = ConfigFile::read(path)?;
            (file.experiments(args.manifest.as_deref(), seed)?, file.parallel || args.parallel)
        }
        None => {
            let Some(manifest) = args.manifest.as_deref() else {
                bail!("give --manifest or --config");
            };
            let base = base_config(manifest, WeightingScheme::Tfidf, seed)?;
            let configs = match args.phase.unwrap_or(1) {
                1 => evlink::harness::phase_one_grid(&base, &WeightingScheme::ALL, &DEFAULT_TSVD_COMPONENTS),
                2 => evlink::harness::phase_two_grid(
                    &base,
                    WeightingScheme::Tfidf,
                    &DEFAULT_TSVD_COMPONENTS,
                    &DEFAULT_CCA_DIMS,
                ),
                other => bail!("unknown grid phase {other}"),
            };
            (configs, args.parallel)
        }
    };
    let report = GridRunner::new().parallel(parallel).run(&configs)?;
    report.write_dir(out)?;
    for s in &report.summaries {
        log_summary(s);
    }
    info!("grid report written to {}", out.join("grid.csv").display());
    Ok(())
}

fn synth(args: SynthArgs, seed: u64, out: &Path) -> Result<()> {
    let params = SynthParams {
        n_distractors: args.n_distractors,
        n_pairs: args.n_pairs,
        rho: args.rho,
        train_fraction: args.train_fraction,
        seed,
        ..SynthParams::default()
    };
    let manifest = evlink::harness::generate_synthetic(&params)?;
    manifest.write_dir(out)?;
    info!("synthetic manifest written to {} ({:?})", out.display(), manifest.counts());
    Ok(())
}
