use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wlsppmi::association::{self, AssociationKind, AssociationMatrix};
use wlsppmi::baselines::{lda, sgns};
use wlsppmi::classify::{self, ClassifierKind, Metric, RunMeta};
use wlsppmi::cooc::{self, CoocCounts};
use wlsppmi::corpus::{self, DatasetFormat, LabeledCorpus, PreprocessOptions, Split, Vocabulary};
use wlsppmi::factorize::{self, DocVectors, EmbeddingMatrix, EmbeddingSource};
use wlsppmi::harness::{self, CellResult, DatasetSource, ExperimentConfig, ModelKind};
use wlsppmi::{selftest, synth, wl, Error, Result};

/// Word-embedding document representations and a text classification benchmark.
#[derive(Parser, Debug)]
#[command(name = "wlsppmi", version)]
struct Cli {
    /// Experiment config supplying defaults for every subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Random seed; defaults to the first seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tokenize a raw dataset split and build its vocabulary.
    Ingest(IngestArgs),
    /// Count windowed word–context pairs.
    Cooc(CoocArgs),
    /// Compute a PMI, PPMI or SPPMI matrix from pair counts.
    Assoc(AssocArgs),
    /// Reweight the rows of rare words in an SPPMI matrix.
    Reweight(ReweightArgs),
    /// Factorize an association matrix into word vectors.
    Svd(SvdArgs),
    /// Train skip-gram word vectors with negative sampling.
    Sgns(SgnsArgs),
    /// Fit an LDA topic model and write topic features.
    Lda(LdaArgs),
    /// Average-pool word vectors into document vectors.
    Docvec(DocvecArgs),
    /// Train a classifier on document vectors and evaluate it.
    Classify(ClassifyArgs),
    /// Run a configured experiment grid and write the CSV report.
    Experiment(ExperimentArgs),
    /// Run the reference-implementation and invariant checks.
    Selftest,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Raw dataset path; defaults to the config's path for the chosen split.
    #[arg(long)]
    input: Option<PathBuf>,
    /// `dirs` (one directory per category) or `lines` (label<TAB>text).
    #[arg(long)]
    format: Option<DatasetFormat>,
    #[arg(long, default_value = "train")]
    split: Split,
    /// Tokenized corpus output.
    #[arg(long)]
    out: PathBuf,
    /// Vocabulary output.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    no_stem: bool,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CorpusVocab {
    /// Tokenized corpus (`id<TAB>label<TAB>tokens`).
    #[arg(long)]
    corpus: PathBuf,
    /// Vocabulary file (`word<TAB>count`).
    #[arg(long)]
    vocab: PathBuf,
}

#[derive(Args, Debug)]
struct CoocArgs {
    #[command(flatten)]
    input: CorpusVocab,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AssocArgs {
    /// Pair counts written by `cooc`.
    #[arg(long)]
    counts: PathBuf,
    #[arg(long, default_value = "sppmi")]
    kind: AssociationKind,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    shift_exponent: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReweightArgs {
    /// SPPMI matrix written by `assoc`.
    #[arg(long)]
    matrix: PathBuf,
    #[command(flatten)]
    input: CorpusVocab,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    low_max_count: Option<u64>,
    #[arg(long)]
    neighbors: Option<usize>,
    #[arg(long)]
    high_min_count: Option<u64>,
    #[arg(long)]
    base_dim: Option<usize>,
    /// Also write the rare word → neighbour lists.
    #[arg(long)]
    pairs_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SvdArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    weighting: Option<f64>,
    #[arg(long)]
    oversample: Option<usize>,
    #[arg(long)]
    power_iters: Option<usize>,
    /// Word vectors in word2vec text format.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SgnsArgs {
    #[command(flatten)]
    input: CorpusVocab,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LdaArgs {
    #[command(flatten)]
    input: CorpusVocab,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    infer_iterations: Option<usize>,
    /// Topic–word matrix as CSV.
    #[arg(long)]
    phi_out: Option<PathBuf>,
    /// Training document–topic matrix as CSV.
    #[arg(long)]
    theta_out: Option<PathBuf>,
    /// Inferred θ features of the training corpus, ready for `classify`.
    #[arg(long)]
    features_out: Option<PathBuf>,
    /// Held-out tokenized corpus to featurize.
    #[arg(long, requires = "test_features_out")]
    test_corpus: Option<PathBuf>,
    #[arg(long, requires = "test_corpus")]
    test_features_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DocvecArgs {
    #[command(flatten)]
    input: CorpusVocab,
    /// Word vectors in word2vec text format.
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Training document vectors (CSV).
    #[arg(long)]
    train: PathBuf,
    /// Test document vectors (CSV).
    #[arg(long)]
    test: PathBuf,
    /// Repeat to evaluate several classifiers.
    #[arg(long = "classifier", default_value = "SVM")]
    classifiers: Vec<ClassifierKind>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    svm_lambda: Option<f64>,
    #[arg(long)]
    svm_epochs: Option<usize>,
    /// Write the accuracies as a report CSV.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Report path, overriding the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Feature cache directory, overriding the config.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Disable the feature cache.
    #[arg(long, conflicts_with = "cache_dir")]
    no_cache: bool,
    #[arg(long, value_delimiter = ',')]
    models: Vec<ModelKind>,
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    classifiers: Vec<ClassifierKind>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => {
            let mut cfg = ExperimentConfig::default();
            cfg.resolve_paths(Path::new("."));
            Ok(cfg)
        }
    }
}

fn read_inputs(input: &CorpusVocab) -> Result<(LabeledCorpus, Vocabulary)> {
    Ok((
        corpus::read_tokenized(&input.corpus, Split::Train)?,
        Vocabulary::read(&input.vocab)?,
    ))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = load_config(cli.config.as_deref())?;
    let seed = cli
        .seed
        .unwrap_or(cfg.experiment.seeds.first().copied().unwrap_or(1));
    match cli.command {
        Command::Ingest(a) => ingest(&cfg, a, cli.seed)?,
        Command::Cooc(a) => {
            let (corpus, vocab) = read_inputs(&a.input)?;
            let counts =
                cooc::count_cooccurrences(&corpus, &vocab, a.window.unwrap_or(cfg.cooc.window))?;
            counts.write(&a.out, Some(&a.input.vocab))?;
            println!(
                "{} nonzero pairs, |D| = {}",
                counts.counts.nnz(),
                counts.total_pairs
            );
        }
        Command::Assoc(a) => {
            let (counts, _) = CoocCounts::read(&a.counts)?;
            let (k, alpha, e) = match a.kind {
                AssociationKind::WlSppmi => {
                    let w = &cfg.wlsppmi;
                    (w.k, w.alpha, w.shift_exponent)
                }
                _ => (cfg.sppmi.k, cfg.sppmi.alpha, cfg.sppmi.shift_exponent),
            };
            let alpha = a.alpha.unwrap_or(alpha);
            let m = match a.kind {
                AssociationKind::Pmi => association::pmi(&counts, alpha)?,
                AssociationKind::Ppmi => association::ppmi(&counts, alpha)?,
                // the WL variant starts from an SPPMI matrix; `reweight` finishes it
                AssociationKind::Sppmi | AssociationKind::WlSppmi => association::sppmi(
                    &counts,
                    a.k.unwrap_or(k),
                    alpha,
                    a.shift_exponent.unwrap_or(e),
                )?,
            };
            m.write(&a.out)?;
            println!("{} stored values", m.rows.nnz());
        }
        Command::Reweight(a) => {
            let w = &mut cfg.wlsppmi;
            w.tau = a.tau.unwrap_or(w.tau);
            w.low_max_count = a.low_max_count.unwrap_or(w.low_max_count);
            w.neighbors = a.neighbors.unwrap_or(w.neighbors);
            w.high_min_count = a.high_min_count.unwrap_or(w.high_min_count);
            w.base_dim = a.base_dim.unwrap_or(w.base_dim);
            let base = AssociationMatrix::read(&a.matrix)?;
            let (corpus, vocab) = read_inputs(&a.input)?;
            let (w, sv) = (&cfg.wlsppmi, &cfg.svd);
            let emb = factorize::embed_association(
                &base,
                w.base_dim.min(vocab.len()),
                sv.weighting,
                seed,
                sv.oversample,
                sv.power_iters,
            )?;
            let stats = wl::discriminability(&corpus, &vocab)?;
            let low = wl::select_low_frequency(&vocab, w.low_max_count)?;
            let pairs = wl::build_similar_pairs(&low, &emb, w.neighbors, w.high_min_count, &vocab)?;
            if let Some(p) = &a.pairs_out {
                pairs.dump(&vocab, p)?;
            }
            let out = wl::reweight(&base, &stats, &pairs, w.tau)?;
            out.write(&a.out)?;
            println!(
                "reweighted {} of {} rare words",
                pairs.pairs.len(),
                low.len()
            );
        }
        Command::Svd(a) => {
            let m = AssociationMatrix::read(&a.matrix)?;
            let vocab = Vocabulary::read(&a.vocab)?;
            let sv = &cfg.svd;
            let dim = a
                .dim
                .or(cfg.experiment.dims.first().copied())
                .unwrap_or(100);
            let emb = factorize::embed_association(
                &m,
                dim,
                a.weighting.unwrap_or(sv.weighting),
                seed,
                a.oversample.unwrap_or(sv.oversample),
                a.power_iters.unwrap_or(sv.power_iters),
            )?;
            emb.write_word2vec(&vocab, &a.out)?;
        }
        Command::Sgns(a) => {
            let (corpus, vocab) = read_inputs(&a.input)?;
            let mut c = cfg.sgns.clone();
            c.dim = a.dim.unwrap_or(c.dim);
            c.window = a.window.unwrap_or(c.window);
            c.negatives = a.negatives.unwrap_or(c.negatives);
            c.epochs = a.epochs.unwrap_or(c.epochs);
            c.learning_rate = a.learning_rate.unwrap_or(c.learning_rate);
            c.subsample = a.subsample.unwrap_or(c.subsample);
            c.parallel |= a.parallel;
            c.seed = seed;
            let model = sgns::train_sgns(&corpus, &vocab, &c)?;
            model.embeddings().write_word2vec(&vocab, &a.out)?;
        }
        Command::Lda(a) => lda_command(&cfg, a, seed)?,
        Command::Docvec(a) => {
            let (corpus, vocab) = read_inputs(&a.input)?;
            let emb = EmbeddingMatrix::read_word2vec(&a.embeddings, &vocab, EmbeddingSource::Svd)?;
            let vectors = factorize::corpus_vectors(&corpus, &emb, &vocab)?;
            vectors.write_csv(&a.out)?;
            if vectors.skipped > 0 {
                eprintln!("{} documents had no in-vocabulary token", vectors.skipped);
            }
        }
        Command::Classify(a) => classify_command(&cfg, a, seed)?,
        Command::Experiment(a) => {
            if cli.config.is_none() {
                return Err(Error::Config("experiment needs --config".into()));
            }
            let e = &mut cfg.experiment;
            if let Some(o) = a.output {
                e.output = o;
            }
            if a.no_cache {
                e.cache_dir = None;
            } else if let Some(d) = a.cache_dir {
                e.cache_dir = Some(d);
            }
            if !a.models.is_empty() {
                e.models = a.models;
            }
            if !a.dims.is_empty() {
                e.dims = a.dims;
            }
            if !a.classifiers.is_empty() {
                e.classifiers = a.classifiers;
            }
            if !a.seeds.is_empty() {
                e.seeds = a.seeds;
            } else if let Some(s) = cli.seed {
                e.seeds = vec![s];
            }
            let results = harness::run_experiment(&cfg)?;
            harness::emit_report(&results, &cfg.experiment.output)?;
            let failed = results.iter().filter(|r| r.outcome.is_err()).count();
            println!(
                "{} cells, {failed} failed; report written to {}",
                results.len(),
                cfg.experiment.output.display()
            );
        }
        Command::Selftest => {
            let outcomes = selftest::run_all(seed);
            let mut ok = true;
            for o in &outcomes {
                let secs = o.elapsed.as_secs_f64();
                match &o.result {
                    Ok(msg) => println!("PASS  {:<40} {secs:>7.2}s  {msg}", o.name),
                    Err(msg) => {
                        ok = false;
                        println!("FAIL  {:<40} {secs:>7.2}s  {msg}", o.name);
                    }
                }
            }
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn ingest(cfg: &ExperimentConfig, a: IngestArgs, seed: Option<u64>) -> Result<()> {
    let d = &cfg.dataset;
    let corpus = match (&a.input, d.source) {
        (None, DatasetSource::Synthetic) => {
            let (train, test) = synth::benchmark(&cfg.synthetic, seed.unwrap_or(d.data_seed))?;
            if a.split == Split::Train {
                train
            } else {
                test
            }
        }
        _ => {
            let input = match a.input {
                Some(p) => p,
                None => match a.split {
                    Split::Train => cfg.train_path(),
                    Split::Test => cfg.test_path(),
                }
                .ok_or_else(|| {
                    Error::Config("no --input and no dataset path in the config".into())
                })?,
            };
            if !input.exists() {
                return Err(Error::InvalidArgument(format!(
                    "dataset path {} does not exist",
                    input.display()
                )));
            }
            let format = a.format.unwrap_or(match d.source {
                DatasetSource::Newsgroups => DatasetFormat::NewsgroupsDirs,
                _ => DatasetFormat::LabelPerLine,
            });
            let stopwords = match a.stopwords.as_ref().or(d.stopwords.as_ref()) {
                Some(p) => PreprocessOptions::load_stopwords(p)?,
                None => Default::default(),
            };
            let opts = PreprocessOptions {
                stem: d.stem && !a.no_stem,
                stopwords,
            };
            corpus::load_dataset(&input, format, a.split, &opts)?
        }
    };
    corpus::write_tokenized(&corpus, &a.out)?;
    let mut summary = format!(
        "{} documents, {} categories",
        corpus.len(),
        corpus.categories.len()
    );
    if let Some(p) = &a.vocab_out {
        let vocab = corpus::build_vocabulary(&corpus, a.min_count.unwrap_or(d.min_count))?;
        vocab.write(p)?;
        summary.push_str(&format!(", {} vocabulary words", vocab.len()));
    }
    println!("{summary}");
    Ok(())
}

fn lda_command(cfg: &ExperimentConfig, a: LdaArgs, seed: u64) -> Result<()> {
    let (corpus, vocab) = read_inputs(&a.input)?;
    let mut c = cfg.lda.clone();
    c.topics = a.topics.unwrap_or(c.topics);
    c.alpha = a.alpha.or(c.alpha);
    c.beta = a.beta.unwrap_or(c.beta);
    c.iterations = a.iterations.unwrap_or(c.iterations);
    c.infer_iterations = a.infer_iterations.unwrap_or(c.infer_iterations);
    c.seed = seed;
    let model = lda::train_lda(&corpus, &vocab, &c)?;
    if let Some(p) = &a.phi_out {
        lda::write_phi_csv(&model, &vocab, p)?;
    }
    if let Some(p) = &a.theta_out {
        let ids: Vec<String> = corpus.documents.iter().map(|d| d.id.clone()).collect();
        lda::write_theta_csv(&model.theta, &ids, p)?;
    }
    if let Some(p) = &a.features_out {
        lda::theta_features(&model, &corpus, &vocab).write_csv(p)?;
    }
    if let (Some(test), Some(out)) = (&a.test_corpus, &a.test_features_out) {
        let test = corpus::read_tokenized(test, Split::Test)?;
        lda::theta_features(&model, &test, &vocab).write_csv(out)?;
    }
    Ok(())
}

fn classify_command(cfg: &ExperimentConfig, a: ClassifyArgs, seed: u64) -> Result<()> {
    let train = DocVectors::read_csv(&a.train)?;
    let test = DocVectors::read_csv(&a.test)?;
    let mut c = cfg.classifier.clone();
    c.knn_k = a.knn_k.unwrap_or(c.knn_k);
    c.knn_metric = a.metric.unwrap_or(c.knn_metric);
    c.svm_lambda = a.svm_lambda.unwrap_or(c.svm_lambda);
    c.svm_epochs = a.svm_epochs.unwrap_or(c.svm_epochs);
    let mut results = Vec::new();
    for kind in a.classifiers {
        let meta = RunMeta {
            dataset: cfg.dataset.name.clone(),
            model: "-".into(),
            dim: train.dim(),
            classifier: kind.to_string(),
            categories: 0,
            seed,
        };
        let model = classify::train(kind, &train, &c, seed)?;
        let mut report = classify::evaluate(&model, &test, meta.clone())?;
        report.meta.categories = model.classes.len();
        println!(
            "{kind}: accuracy {:.4} over {} test documents",
            report.accuracy,
            report.total()
        );
        results.push(CellResult {
            meta: report.meta.clone(),
            outcome: Ok(report),
        });
    }
    if let Some(p) = &a.report {
        harness::emit_report(&results, p)?;
    }
    Ok(())
}
