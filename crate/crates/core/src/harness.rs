//! Config-driven experiment grids and CSV reports.
//!
//! A config is a TOML file with one section per pipeline stage. Relative paths
//! resolve against the directory holding the config file. Two environment
//! variables override locations: `WLSPPMI_DATA_DIR` replaces the dataset root and
//! `WLSPPMI_CACHE_DIR` replaces the feature cache directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{self, AssociationMatrix};
use crate::baselines::{lda, sgns, LdaConfig, SgnsConfig};
use crate::classify::{self, ClassifierConfig, ClassifierKind, EvalReport, RunMeta};
use crate::cooc::{self, CoocCounts};
use crate::corpus::{self, DatasetFormat, LabeledCorpus, PreprocessOptions, Split, Vocabulary};
use crate::error::{Error, Result};
use crate::factorize::{self, DocVectors, EmbeddingMatrix};
use crate::synth::{self, BenchmarkSpec};
use crate::util;
use crate::wl;

pub const DATA_DIR_ENV: &str = "WLSPPMI_DATA_DIR";
pub const CACHE_DIR_ENV: &str = "WLSPPMI_CACHE_DIR";

/// Bumped whenever a change alters cached features.
const CACHE_VERSION: &str = "features-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "LDA")]
    Lda,
    #[serde(rename = "SGNS")]
    Sgns,
    #[serde(rename = "SPPMI")]
    Sppmi,
    #[serde(rename = "WLSPPMI")]
    WlSppmi,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lda => "LDA",
            ModelKind::Sgns => "SGNS",
            ModelKind::Sppmi => "SPPMI",
            ModelKind::WlSppmi => "WLSPPMI",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "LDA" => Ok(ModelKind::Lda),
            "SGNS" => Ok(ModelKind::Sgns),
            "SPPMI" => Ok(ModelKind::Sppmi),
            "WLSPPMI" => Ok(ModelKind::WlSppmi),
            other => Err(Error::invalid(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    /// One directory per category.
    Newsgroups,
    /// `label<TAB>text` lines.
    Lines,
    /// Generated in memory from the `[synthetic]` section.
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub output: PathBuf,
    pub models: Vec<ModelKind>,
    pub dims: Vec<usize>,
    pub classifiers: Vec<ClassifierKind>,
    pub seeds: Vec<u64>,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            name: "experiment".into(),
            output: PathBuf::from("results.csv"),
            models: vec![ModelKind::Sppmi],
            dims: vec![50],
            classifiers: vec![ClassifierKind::Svm],
            seeds: vec![1],
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Identifier written to the report.
    pub name: String,
    pub source: DatasetSource,
    /// Base for relative `train` and `test` paths.
    pub root: PathBuf,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub fraction: f64,
    pub min_count: u64,
    pub stem: bool,
    pub stopwords: Option<PathBuf>,
    /// Seed for the synthetic generator; the data stays fixed across experiment seeds.
    pub data_seed: u64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            name: "dataset".into(),
            source: DatasetSource::Synthetic,
            root: PathBuf::from("."),
            train: None,
            test: None,
            fraction: 1.0,
            min_count: 5,
            stem: true,
            stopwords: None,
            data_seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategorySelect {
    All,
    Names,
    First,
    Largest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CategorySection {
    pub select: CategorySelect,
    pub names: Vec<String>,
    /// One subset per entry when `select` is `first` or `largest`.
    pub counts: Vec<usize>,
}

impl Default for CategorySection {
    fn default() -> Self {
        CategorySection {
            select: CategorySelect::All,
            names: Vec::new(),
            counts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoocSection {
    pub window: usize,
}

impl Default for CoocSection {
    fn default() -> Self {
        CoocSection {
            window: cooc::DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SppmiSection {
    pub k: f64,
    pub alpha: f64,
    pub shift_exponent: f64,
}

impl Default for SppmiSection {
    fn default() -> Self {
        SppmiSection {
            k: 5.0,
            alpha: 1.0,
            shift_exponent: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WlSection {
    pub k: f64,
    pub alpha: f64,
    pub shift_exponent: f64,
    pub tau: f64,
    pub low_max_count: u64,
    pub neighbors: usize,
    pub high_min_count: u64,
    /// Dimension of the SVD embedding used to find similar words.
    pub base_dim: usize,
}

impl Default for WlSection {
    fn default() -> Self {
        WlSection {
            k: 5.0,
            alpha: 0.75,
            shift_exponent: 0.75,
            tau: wl::DEFAULT_TAU,
            low_max_count: wl::DEFAULT_LOW_MAX_COUNT,
            neighbors: wl::DEFAULT_NEIGHBORS,
            high_min_count: wl::DEFAULT_HIGH_MIN_COUNT,
            base_dim: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvdSection {
    pub oversample: usize,
    pub power_iters: usize,
    pub weighting: f64,
}

impl Default for SvdSection {
    fn default() -> Self {
        SvdSection {
            oversample: factorize::DEFAULT_OVERSAMPLE,
            power_iters: factorize::DEFAULT_POWER_ITERS,
            weighting: factorize::DEFAULT_WEIGHTING,
        }
    }
}

/// Every knob of an experiment. Missing sections and keys take their defaults;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub dataset: DatasetSection,
    pub categories: CategorySection,
    pub cooc: CoocSection,
    pub sppmi: SppmiSection,
    pub wlsppmi: WlSection,
    pub svd: SvdSection,
    pub sgns: SgnsConfig,
    pub lda: LdaConfig,
    pub classifier: ClassifierConfig,
    pub synthetic: BenchmarkSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file and resolves its relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&util::read_to_string(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    /// Anchors relative paths at `base` and applies the environment overrides.
    pub fn resolve_paths(&mut self, base: &Path) {
        let anchor = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        self.experiment.output = anchor(&self.experiment.output);
        self.experiment.cache_dir = match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) => Some(PathBuf::from(dir)),
            None => self.experiment.cache_dir.as_deref().map(anchor),
        };
        self.dataset.root = match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => anchor(&self.dataset.root),
        };
        self.dataset.stopwords = self.dataset.stopwords.as_deref().map(anchor);
    }

    pub fn train_path(&self) -> Option<PathBuf> {
        self.dataset
            .train
            .as_ref()
            .map(|p| self.dataset.root.join(p))
    }

    pub fn test_path(&self) -> Option<PathBuf> {
        self.dataset
            .test
            .as_ref()
            .map(|p| self.dataset.root.join(p))
    }

    /// Checks every documented parameter domain.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let e = &self.experiment;
        if e.models.is_empty()
            || e.dims.is_empty()
            || e.classifiers.is_empty()
            || e.seeds.is_empty()
        {
            return bad(
                "experiment needs at least one model, dimension, classifier and seed".into(),
            );
        }
        if let Some(d) = e.dims.iter().find(|&&d| d < 1) {
            return bad(format!("dimension {d} must be ≥ 1"));
        }
        let d = &self.dataset;
        if !(d.fraction > 0.0 && d.fraction <= 1.0) {
            return bad(format!("fraction {} outside (0, 1]", d.fraction));
        }
        if d.min_count < 1 {
            return bad("min_count must be ≥ 1".into());
        }
        if d.source != DatasetSource::Synthetic && (d.train.is_none() || d.test.is_none()) {
            return bad("dataset needs train and test paths".into());
        }
        let c = &self.categories;
        match c.select {
            CategorySelect::Names if c.names.is_empty() => {
                return bad("category names list is empty".into())
            }
            CategorySelect::First | CategorySelect::Largest
                if c.counts.is_empty() || c.counts.contains(&0) =>
            {
                return bad("category counts must be a nonempty list of positive numbers".into())
            }
            _ => {}
        }
        if self.cooc.window < 1 {
            return bad("window must be ≥ 1".into());
        }
        for (name, k, a, s) in [
            (
                "sppmi",
                self.sppmi.k,
                self.sppmi.alpha,
                self.sppmi.shift_exponent,
            ),
            (
                "wlsppmi",
                self.wlsppmi.k,
                self.wlsppmi.alpha,
                self.wlsppmi.shift_exponent,
            ),
        ] {
            if !(k >= 1.0) || !(a > 0.0 && a <= 1.0) || !(s > 0.0 && s <= 1.0) {
                return bad(format!(
                    "[{name}] needs k ≥ 1, alpha and shift_exponent in (0, 1]"
                ));
            }
        }
        let w = &self.wlsppmi;
        if !(w.tau > 0.0 && w.tau < 1.0) || w.low_max_count < 1 || w.neighbors < 1 || w.base_dim < 1
        {
            return bad("[wlsppmi] needs tau in (0, 1) and positive counts".into());
        }
        if !(0.0..=1.0).contains(&self.svd.weighting) {
            return bad("[svd] weighting outside [0, 1]".into());
        }
        if self.sgns.negatives < 1 || self.sgns.window < 1 || !(self.sgns.learning_rate > 0.0) {
            return bad("[sgns] needs positive negatives, window and learning rate".into());
        }
        if self.lda.iterations < 1
            || !(self.lda.beta > 0.0)
            || self.lda.alpha.is_some_and(|a| !(a > 0.0))
        {
            return bad("[lda] needs iterations ≥ 1 and positive priors".into());
        }
        if self.classifier.knn_k < 1
            || self.classifier.svm_epochs < 1
            || !(self.classifier.svm_lambda > 0.0)
        {
            return bad("[classifier] needs knn_k, svm_epochs and svm_lambda positive".into());
        }
        Ok(())
    }
}

/// One grid cell: its identity and either an evaluation or the error that stopped it.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub meta: RunMeta,
    pub outcome: std::result::Result<EvalReport, String>,
}

fn load_splits(cfg: &ExperimentConfig) -> Result<(LabeledCorpus, LabeledCorpus)> {
    let d = &cfg.dataset;
    if d.source == DatasetSource::Synthetic {
        return synth::benchmark(&cfg.synthetic, d.data_seed);
    }
    let format = match d.source {
        DatasetSource::Newsgroups => DatasetFormat::NewsgroupsDirs,
        _ => DatasetFormat::LabelPerLine,
    };
    let opts = PreprocessOptions {
        stem: d.stem,
        stopwords: match &d.stopwords {
            Some(p) => PreprocessOptions::load_stopwords(p)?,
            None => Default::default(),
        },
    };
    let mut out = Vec::new();
    for (path, split) in [
        (cfg.train_path(), Split::Train),
        (cfg.test_path(), Split::Test),
    ] {
        let path = path.expect("validated");
        if !path.exists() {
            return Err(Error::invalid(format!(
                "dataset path {} does not exist",
                path.display()
            )));
        }
        out.push(corpus::load_dataset(&path, format, split, &opts)?);
    }
    let test = out.pop().expect("two splits");
    let train = out.pop().expect("two splits");
    log::info!(
        "loaded {}: {} train / {} test documents, {} categories",
        d.name,
        train.len(),
        test.len(),
        train.categories.len()
    );
    Ok((train, test))
}

fn category_subsets(cfg: &ExperimentConfig, train: &LabeledCorpus) -> Result<Vec<Vec<String>>> {
    let c = &cfg.categories;
    let available = &train.categories;
    let check = |n: usize| {
        if n > available.len() {
            Err(Error::Config(format!(
                "{n} categories requested, dataset has {}",
                available.len()
            )))
        } else {
            Ok(())
        }
    };
    Ok(match c.select {
        CategorySelect::All => vec![available.clone()],
        CategorySelect::Names => {
            let mut names = c.names.clone();
            names.sort();
            names.dedup();
            if let Some(missing) = names.iter().find(|n| train.category_index(n).is_none()) {
                return Err(Error::Config(format!(
                    "category {missing:?} not in dataset"
                )));
            }
            vec![names]
        }
        CategorySelect::First => c
            .counts
            .iter()
            .map(|&n| check(n).map(|_| available[..n].to_vec()))
            .collect::<Result<_>>()?,
        CategorySelect::Largest => c
            .counts
            .iter()
            .map(|&n| check(n).map(|_| corpus::largest_categories(train, n)))
            .collect::<Result<_>>()?,
    })
}

type Shared<T> = OnceLock<std::result::Result<T, String>>;

fn shared<T>(cell: &Shared<T>, f: impl FnOnce() -> Result<T>) -> std::result::Result<&T, String> {
    cell.get_or_init(|| f().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(Clone::clone)
}

/// Restricted splits for one (seed, category subset) and lazily built intermediates.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    train: LabeledCorpus,
    test: LabeledCorpus,
    key: String,
    vocab: Shared<Vocabulary>,
    counts: Shared<CoocCounts>,
    sppmi: Shared<AssociationMatrix>,
    wl: Shared<AssociationMatrix>,
}

impl Context<'_> {
    fn vocab(&self) -> std::result::Result<&Vocabulary, String> {
        shared(&self.vocab, || {
            corpus::build_vocabulary(&self.train, self.cfg.dataset.min_count)
        })
    }

    fn counts(&self) -> std::result::Result<&CoocCounts, String> {
        let vocab = self.vocab()?;
        shared(&self.counts, || {
            cooc::count_cooccurrences(&self.train, vocab, self.cfg.cooc.window)
        })
    }

    fn sppmi(&self) -> std::result::Result<&AssociationMatrix, String> {
        let counts = self.counts()?;
        let s = &self.cfg.sppmi;
        shared(&self.sppmi, || {
            association::sppmi(counts, s.k, s.alpha, s.shift_exponent)
        })
    }

    fn wl(&self) -> std::result::Result<&AssociationMatrix, String> {
        let counts = self.counts()?;
        let vocab = self.vocab()?;
        let w = &self.cfg.wlsppmi;
        let sv = &self.cfg.svd;
        shared(&self.wl, || {
            let base = association::sppmi(counts, w.k, w.alpha, w.shift_exponent)?;
            let base_dim = w.base_dim.min(vocab.len());
            let emb = factorize::embed_association(
                &base,
                base_dim,
                sv.weighting,
                self.seed,
                sv.oversample,
                sv.power_iters,
            )?;
            let stats = wl::discriminability(&self.train, vocab)?;
            let low = wl::select_low_frequency(vocab, w.low_max_count)?;
            let pairs = wl::build_similar_pairs(&low, &emb, w.neighbors, w.high_min_count, vocab)?;
            log::info!(
                "reweighting {} of {} rare words",
                pairs.pairs.len(),
                low.len()
            );
            wl::reweight(&base, &stats, &pairs, w.tau)
        })
    }

    fn pooled(&self, emb: &EmbeddingMatrix) -> Result<(DocVectors, DocVectors)> {
        let vocab = self.vocab().map_err(Error::InvalidArgument)?;
        Ok((
            factorize::corpus_vectors(&self.train, emb, vocab)?,
            factorize::corpus_vectors(&self.test, emb, vocab)?,
        ))
    }

    fn build_features(&self, model: ModelKind, dim: usize) -> Result<(DocVectors, DocVectors)> {
        let lift = Error::InvalidArgument;
        let sv = &self.cfg.svd;
        match model {
            ModelKind::Sppmi | ModelKind::WlSppmi => {
                let m = if model == ModelKind::Sppmi {
                    self.sppmi()
                } else {
                    self.wl()
                }
                .map_err(lift)?;
                let emb = factorize::embed_association(
                    m,
                    dim,
                    sv.weighting,
                    self.seed,
                    sv.oversample,
                    sv.power_iters,
                )?;
                self.pooled(&emb)
            }
            ModelKind::Sgns => {
                let vocab = self.vocab().map_err(lift)?;
                let cfg = SgnsConfig {
                    dim,
                    seed: self.seed,
                    ..self.cfg.sgns.clone()
                };
                let model = sgns::train_sgns(&self.train, vocab, &cfg)?;
                self.pooled(&model.embeddings())
            }
            ModelKind::Lda => {
                let vocab = self.vocab().map_err(lift)?;
                let cfg = LdaConfig {
                    topics: dim,
                    seed: self.seed,
                    ..self.cfg.lda.clone()
                };
                let model = lda::train_lda(&self.train, vocab, &cfg)?;
                Ok((
                    lda::theta_features(&model, &self.train, vocab),
                    lda::theta_features(&model, &self.test, vocab),
                ))
            }
        }
    }

    /// Parameters that influence the features of one model, in a stable text form.
    fn param_text(&self, model: ModelKind) -> String {
        let c = self.cfg;
        match model {
            ModelKind::Sppmi => format!("{:?}{:?}{:?}", c.cooc, c.sppmi, c.svd),
            ModelKind::WlSppmi => format!("{:?}{:?}{:?}", c.cooc, c.wlsppmi, c.svd),
            ModelKind::Sgns => format!("{:?}", c.sgns),
            ModelKind::Lda => format!("{:?}", c.lda),
        }
    }

    fn features(&self, model: ModelKind, dim: usize) -> Result<(DocVectors, DocVectors)> {
        let Some(dir) = &self.cfg.experiment.cache_dir else {
            return self.build_features(model, dim);
        };
        let key = util::hex_digest(
            format!(
                "{CACHE_VERSION}|{}|{model}|{dim}|{}|{}",
                self.key,
                self.cfg.dataset.min_count,
                self.param_text(model)
            )
            .as_bytes(),
        );
        let train_path = dir.join(format!("{key}-train.csv"));
        let test_path = dir.join(format!("{key}-test.csv"));
        if train_path.exists() && test_path.exists() {
            match (
                DocVectors::read_csv(&train_path),
                DocVectors::read_csv(&test_path),
            ) {
                (Ok(a), Ok(b)) => {
                    log::debug!("cache hit {key}");
                    return Ok((a, b));
                }
                _ => log::warn!("unreadable cache entry {key}; rebuilding"),
            }
        }
        let (train, test) = self.build_features(model, dim)?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        train.write_csv(&train_path)?;
        test.write_csv(&test_path)?;
        Ok((train, test))
    }
}

/// Runs every (seed, category subset, model, dimension, classifier) cell.
///
/// Dataset loading and config errors abort the run. Anything that fails inside a
/// cell is recorded in that cell's result and the remaining cells still run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    let (train_full, test_full) = load_splits(cfg)?;
    let subsets = category_subsets(cfg, &train_full)?;
    let e = &cfg.experiment;
    let mut results = Vec::new();
    for &seed in &e.seeds {
        for keep in &subsets {
            let meta = |model: ModelKind, dim: usize, classifier: ClassifierKind| RunMeta {
                dataset: cfg.dataset.name.clone(),
                model: model.to_string(),
                dim,
                classifier: classifier.to_string(),
                categories: keep.len(),
                seed,
            };
            let restricted =
                corpus::restrict_categories(&train_full, keep, seed, cfg.dataset.fraction)
                    .and_then(|train| {
                        corpus::restrict_categories(&test_full, keep, seed, cfg.dataset.fraction)
                            .map(|test| (train, test))
                    });
            let (train, test) = match restricted {
                Ok(pair) => pair,
                Err(err) => {
                    for &m in &e.models {
                        for &d in &e.dims {
                            for &c in &e.classifiers {
                                results.push(CellResult {
                                    meta: meta(m, d, c),
                                    outcome: Err(err.to_string()),
                                });
                            }
                        }
                    }
                    continue;
                }
            };
            let ctx = Context {
                cfg,
                seed,
                key: format!("{}|{}|{seed}", train.fingerprint(), test.fingerprint()),
                train,
                test,
                vocab: OnceLock::new(),
                counts: OnceLock::new(),
                sppmi: OnceLock::new(),
                wl: OnceLock::new(),
            };
            let grid: Vec<(ModelKind, usize)> = e
                .models
                .iter()
                .flat_map(|&m| e.dims.iter().map(move |&d| (m, d)))
                .collect();
            let cells: Vec<Vec<CellResult>> = grid
                .par_iter()
                .map(|&(model, dim)| {
                    log::info!("seed {seed}, {} categories: {model} d={dim}", keep.len());
                    let features = ctx.features(model, dim).map_err(|e| e.to_string());
                    e.classifiers
                        .iter()
                        .map(|&kind| {
                            let meta = meta(model, dim, kind);
                            let outcome = features.clone().and_then(|(tr, te)| {
                                let clf = classify::train(kind, &tr, &cfg.classifier, seed)
                                    .map_err(|e| e.to_string())?;
                                classify::evaluate(&clf, &te, meta.clone())
                                    .map_err(|e| e.to_string())
                            });
                            if let Err(msg) = &outcome {
                                log::warn!("cell {model}/{dim}/{kind} failed: {msg}");
                            }
                            CellResult { meta, outcome }
                        })
                        .collect()
                })
                .collect();
            results.extend(cells.into_iter().flatten());
        }
    }
    Ok(results)
}

/// Writes `dataset,model,dim,classifier,categories,seed,accuracy` rows sorted by
/// those columns. Failed cells carry `error: <message>` in the accuracy column.
pub fn emit_report(results: &[CellResult], path: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(Error::invalid("no results to report"));
    }
    let mut rows: Vec<&CellResult> = results.iter().collect();
    rows.sort_by(|a, b| {
        let key = |r: &CellResult| {
            let m = &r.meta;
            (
                m.dataset.clone(),
                m.model.clone(),
                m.dim,
                m.classifier.clone(),
                m.categories,
                m.seed,
            )
        };
        key(a).cmp(&key(b))
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::invalid(format!("{}: {e}", path.display()));
    w.write_record([
        "dataset",
        "model",
        "dim",
        "classifier",
        "categories",
        "seed",
        "accuracy",
    ])
    .map_err(err)?;
    for r in rows {
        let m = &r.meta;
        let acc = match &r.outcome {
            Ok(rep) => format!("{:.6}", rep.accuracy),
            Err(msg) => format!("error: {msg}"),
        };
        w.write_record([
            m.dataset.as_str(),
            m.model.as_str(),
            &m.dim.to_string(),
            m.classifier.as_str(),
            &m.categories.to_string(),
            &m.seed.to_string(),
            &acc,
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    util::write_atomic(path, &bytes)
}

/// Mean accuracy per (model, dim, classifier, categories) over seeds, skipping failed cells.
pub fn mean_accuracy(results: &[CellResult]) -> BTreeMap<(String, usize, String, usize), f64> {
    let mut acc: BTreeMap<(String, usize, String, usize), (f64, usize)> = BTreeMap::new();
    for r in results {
        if let Ok(rep) = &r.outcome {
            let m = &r.meta;
            let e = acc
                .entry((m.model.clone(), m.dim, m.classifier.clone(), m.categories))
                .or_default();
            e.0 += rep.accuracy;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(k, (s, n))| (k, s / n as f64))
        .collect()
}
