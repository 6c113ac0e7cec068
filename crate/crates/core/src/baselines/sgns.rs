//! Skip-gram with negative sampling.
//!
//! Parameters live in relaxed atomics so the same update code serves the
//! deterministic single-threaded mode and the lock-free parallel mode.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooc::CoocCounts;
use crate::corpus::{LabeledCorpus, Split, Vocabulary};
use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::factorize::{EmbeddingMatrix, EmbeddingSource};
use crate::{association, stats, util};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    pub seed: u64,
    /// Lock-free multi-threaded updates. Results then vary between runs.
    pub parallel: bool,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            subsample: 1e-4,
            seed: 1,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsModel {
    pub words: Dense,
    pub contexts: Dense,
    pub config: SgnsConfig,
    pub vocab_ref: String,
}

impl SgnsModel {
    pub fn embeddings(&self) -> EmbeddingMatrix {
        EmbeddingMatrix {
            matrix: self.words.clone(),
            source: EmbeddingSource::Sgns,
            weighting: None,
            vocab_ref: self.vocab_ref.clone(),
        }
    }
}

/// Draws contexts with probability `#(c)^¾ / Σ #(c')^¾`.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    dist: WeightedIndex<f64>,
    probabilities: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64]) -> Result<Self> {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let z: f64 = weights.iter().sum();
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| Error::invalid(format!("negative sampling table: {e}")))?;
        Ok(NegativeSampler {
            probabilities: weights.iter().map(|w| w / z).collect(),
            dist,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.dist.sample(rng) as u32
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

struct AtomicMatrix {
    cols: usize,
    data: Vec<AtomicU64>,
}

impl AtomicMatrix {
    fn from_dense(m: &Dense) -> Self {
        AtomicMatrix {
            cols: m.n_cols(),
            data: m
                .as_slice()
                .iter()
                .map(|v| AtomicU64::new(v.to_bits()))
                .collect(),
        }
    }

    fn load_row(&self, r: usize, out: &mut [f64]) {
        let row = &self.data[r * self.cols..(r + 1) * self.cols];
        for (o, a) in out.iter_mut().zip(row) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn store_row(&self, r: usize, vals: &[f64]) {
        let row = &self.data[r * self.cols..(r + 1) * self.cols];
        for (a, v) in row.iter().zip(vals) {
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_dense(self, rows: usize) -> Dense {
        let data = self
            .data
            .into_iter()
            .map(|a| f64::from_bits(a.into_inner()))
            .collect();
        Dense::from_vec(rows, self.cols, data)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Negative-sampling loss `−ln σ(w·c⁺) − Σ ln σ(−w·c⁻)` for one tuple.
pub fn pair_loss(word: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    let mut loss = -sigmoid(util::dot(word, positive)).ln();
    for n in negatives {
        loss -= sigmoid(-util::dot(word, n)).ln();
    }
    loss
}

/// Updates one context row against a fixed word vector and accumulates the
/// word-side gradient step into `word_step`.
fn context_step(word: &[f64], word_step: &mut [f64], ctx: &mut [f64], label: f64, lr: f64) {
    let g = (label - sigmoid(util::dot(word, ctx))) * lr;
    for ((s, c), w) in word_step.iter_mut().zip(ctx.iter_mut()).zip(word) {
        *s += g * *c;
        *c += g * w;
    }
}

/// One SGD step on a (word, targets) tuple, where each target carries label 1
/// (observed context) or 0 (negative). Context rows are updated in place with the
/// pre-update word vector; the word vector is updated last.
pub fn pair_update(word: &mut [f64], targets: &mut [(&mut [f64], f64)], lr: f64) {
    let mut step = vec![0.0; word.len()];
    for (ctx, label) in targets.iter_mut() {
        context_step(word, &mut step, ctx, *label, lr);
    }
    for (w, s) in word.iter_mut().zip(&step) {
        *w += s;
    }
}

/// Seeded initialization: words uniform in `±0.5/d`, contexts zero.
pub fn initial_model(vocab: &Vocabulary, config: &SgnsConfig) -> SgnsModel {
    let d = config.dim;
    let mut rng = util::rng_for(config.seed, "sgns-init");
    let data = (0..vocab.len() * d)
        .map(|_| (rng.random::<f64>() - 0.5) / d as f64)
        .collect();
    SgnsModel {
        words: Dense::from_vec(vocab.len(), d, data),
        contexts: Dense::zeros(vocab.len(), d),
        config: config.clone(),
        vocab_ref: vocab.fingerprint(),
    }
}

struct Trainer<'a> {
    words: AtomicMatrix,
    contexts: AtomicMatrix,
    sampler: NegativeSampler,
    keep_prob: Vec<f64>,
    config: &'a SgnsConfig,
    total_steps: usize,
    done: AtomicUsize,
}

impl Trainer<'_> {
    fn learning_rate(&self) -> f64 {
        let progress = self.done.load(Ordering::Relaxed) as f64 / self.total_steps.max(1) as f64;
        self.config.learning_rate * (1.0 - progress).max(1e-4)
    }

    fn train_document(&self, ids: &[u32], rng: &mut ChaCha8Rng) {
        let d = self.config.dim;
        let kept: Vec<u32> = ids
            .iter()
            .copied()
            .filter(|&id| {
                let p = self.keep_prob[id as usize];
                p >= 1.0 || rng.random::<f64>() < p
            })
            .collect();
        let lr = self.learning_rate();
        let mut w = vec![0.0; d];
        let mut grad = vec![0.0; d];
        let mut c = vec![0.0; d];
        let window = self.config.window;
        for (i, &center) in kept.iter().enumerate() {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(kept.len() - 1);
            for (j, &ctx) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                if j == i {
                    continue;
                }
                self.words.load_row(center as usize, &mut w);
                grad.iter_mut().for_each(|g| *g = 0.0);
                for n in 0..=self.config.negatives {
                    let (target, label) = if n == 0 {
                        (ctx, 1.0)
                    } else {
                        (self.sampler.sample(rng), 0.0)
                    };
                    self.contexts.load_row(target as usize, &mut c);
                    context_step(&w, &mut grad, &mut c, label, lr);
                    self.contexts.store_row(target as usize, &c);
                }
                for (x, g) in w.iter_mut().zip(&grad) {
                    *x += g;
                }
                self.words.store_row(center as usize, &w);
            }
        }
        self.done.fetch_add(ids.len(), Ordering::Relaxed);
    }
}

pub fn train_sgns(
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
    config: &SgnsConfig,
) -> Result<SgnsModel> {
    if corpus.split != Split::Train {
        return Err(Error::invalid("SGNS is trained on the training split"));
    }
    if corpus.is_empty() {
        return Err(Error::invalid("empty corpus"));
    }
    if config.dim < 1 || config.negatives < 1 || config.window < 1 {
        return Err(Error::invalid("SGNS needs dim, negatives and window ≥ 1"));
    }
    let init = initial_model(vocab, config);
    let docs: Vec<Vec<u32>> = corpus
        .documents
        .iter()
        .map(|d| vocab.encode(&d.tokens))
        .collect();
    let total = vocab.total_tokens() as f64;
    let keep_prob = vocab
        .counts()
        .iter()
        .map(|&c| {
            if config.subsample <= 0.0 {
                1.0
            } else {
                let f = c as f64 / total;
                let t = config.subsample;
                ((f / t).sqrt() + 1.0) * t / f
            }
        })
        .collect();
    let trainer = Trainer {
        words: AtomicMatrix::from_dense(&init.words),
        contexts: AtomicMatrix::from_dense(&init.contexts),
        sampler: NegativeSampler::new(vocab.counts())?,
        keep_prob,
        config,
        total_steps: config.epochs * docs.iter().map(Vec::len).sum::<usize>(),
        done: AtomicUsize::new(0),
    };
    for epoch in 0..config.epochs {
        if config.parallel {
            docs.par_iter().enumerate().for_each(|(i, ids)| {
                let mut rng = util::rng_for(config.seed, &format!("sgns-{epoch}-{i}"));
                trainer.train_document(ids, &mut rng);
            });
        } else {
            let mut rng = util::rng_for(config.seed, &format!("sgns-{epoch}"));
            for ids in &docs {
                trainer.train_document(ids, &mut rng);
            }
        }
    }
    let n = vocab.len();
    Ok(SgnsModel {
        words: trainer.words.into_dense(n),
        contexts: trainer.contexts.into_dense(n),
        config: config.clone(),
        vocab_ref: init.vocab_ref,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationCheck {
    pub spearman: f64,
    pub median_abs_error: f64,
    pub pairs: usize,
}

/// Compares `W_i · C_j` with `PMI(i, j) − ln k` over pairs with `#(i,j) ≥ min_pair_count`.
pub fn check_implicit_factorization(
    model: &SgnsModel,
    counts: &CoocCounts,
    k: f64,
    min_pair_count: u64,
) -> Result<FactorizationCheck> {
    if model.vocab_ref != counts.vocab_ref || model.words.n_rows() != counts.vocab_size() {
        return Err(Error::VocabularyMismatch(
            "model and counts index different vocabularies".into(),
        ));
    }
    let pmi = association::pmi(counts, 1.0)?;
    let shift = k.ln();
    let mut dots = Vec::new();
    let mut targets = Vec::new();
    for (w, c, n) in counts.counts.iter() {
        if (n as u64) < min_pair_count {
            continue;
        }
        dots.push(util::dot(
            model.words.row(w),
            model.contexts.row(c as usize),
        ));
        targets.push(pmi.get(w as u32, c) - shift);
    }
    if dots.len() < 10 {
        return Err(Error::invalid(format!(
            "only {} pairs with count ≥ {min_pair_count}",
            dots.len()
        )));
    }
    let errors: Vec<f64> = dots
        .iter()
        .zip(&targets)
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(FactorizationCheck {
        spearman: stats::spearman(&dots, &targets),
        median_abs_error: stats::median(&errors),
        pairs: dots.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, Document};
    use rand::SeedableRng;

    fn numeric_grad(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += h;
                b[i] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    #[test]
    fn update_matches_finite_difference_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut v =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let (w, pos, n1, n2) = (v(6), v(6), v(6), v(6));

        let gw = numeric_grad(|x| pair_loss(x, &pos, &[&n1, &n2]), &w);
        let gp = numeric_grad(|x| pair_loss(&w, x, &[&n1, &n2]), &pos);
        let gn1 = numeric_grad(|x| pair_loss(&w, &pos, &[x, &n2]), &n1);

        let lr = 1e-3;
        let (mut w2, mut p2, mut a2, mut b2) = (w.clone(), pos.clone(), n1.clone(), n2.clone());
        pair_update(
            &mut w2,
            &mut [(&mut p2, 1.0), (&mut a2, 0.0), (&mut b2, 0.0)],
            lr,
        );
        for i in 0..6 {
            assert!(rel_err((w2[i] - w[i]) / lr, -gw[i]) < 1e-5, "word {i}");
            assert!(
                rel_err((p2[i] - pos[i]) / lr, -gp[i]) < 1e-5,
                "positive {i}"
            );
            assert!(
                rel_err((a2[i] - n1[i]) / lr, -gn1[i]) < 1e-5,
                "negative {i}"
            );
        }
    }

    #[test]
    fn negative_sampling_distribution() {
        let counts: Vec<u64> = (1..=60).map(|i| (i * i) as u64 % 97 + 1).collect();
        let sampler = NegativeSampler::new(&counts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hits = vec![0usize; counts.len()];
        let draws = 1_000_000;
        for _ in 0..draws {
            hits[sampler.sample(&mut rng) as usize] += 1;
        }
        let z: f64 = counts.iter().map(|&c| (c as f64).powf(0.75)).sum();
        for (c, h) in counts.iter().zip(&hits) {
            let want = (*c as f64).powf(0.75) / z;
            assert!((*h as f64 / draws as f64 - want).abs() < 0.01);
        }
    }

    fn toy_corpus() -> LabeledCorpus {
        let mut docs = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..400 {
            let pair = if i % 2 == 0 {
                ["aa", "bb"]
            } else {
                ["cc", "dd"]
            };
            let tokens = (0..20)
                .map(|_| pair[rng.random_range(0..2)].to_string())
                .collect();
            docs.push(Document {
                id: i.to_string(),
                label: "x".into(),
                tokens,
            });
        }
        LabeledCorpus::new(docs, Split::Train).unwrap()
    }

    fn cos(a: &[f64], b: &[f64]) -> f64 {
        util::dot(a, b) / (util::norm(a) * util::norm(b))
    }

    #[test]
    fn co_occurring_words_end_up_closer() {
        let c = toy_corpus();
        let v = build_vocabulary(&c, 1).unwrap();
        let cfg = SgnsConfig {
            dim: 8,
            window: 2,
            epochs: 3,
            subsample: 0.0,
            ..SgnsConfig::default()
        };
        let m = train_sgns(&c, &v, &cfg).unwrap();
        let row = |w: &str| m.words.row(v.id(w).unwrap() as usize);
        assert!(cos(row("aa"), row("bb")) > cos(row("aa"), row("cc")));
        assert!(m.words.is_finite() && m.contexts.is_finite());
    }

    #[test]
    fn zero_epochs_is_initialization() {
        let c = toy_corpus();
        let v = build_vocabulary(&c, 1).unwrap();
        let cfg = SgnsConfig {
            dim: 4,
            epochs: 0,
            ..SgnsConfig::default()
        };
        let m = train_sgns(&c, &v, &cfg).unwrap();
        let init = initial_model(&v, &cfg);
        assert_eq!(m.words, init.words);
        assert_eq!(m.contexts, init.contexts);
    }

    #[test]
    fn single_threaded_training_is_deterministic() {
        let c = toy_corpus();
        let v = build_vocabulary(&c, 1).unwrap();
        let cfg = SgnsConfig {
            dim: 4,
            epochs: 1,
            ..SgnsConfig::default()
        };
        assert_eq!(
            train_sgns(&c, &v, &cfg).unwrap(),
            train_sgns(&c, &v, &cfg).unwrap()
        );
    }

    #[test]
    fn scalar_sign_follows_shifted_pmi() {
        // two words; "aa bb" alternate so PMI(aa,bb) = ln 2 > 0 but ln 2 − ln 5 < 0
        let docs = (0..200)
            .map(|i| Document {
                id: i.to_string(),
                label: "x".into(),
                tokens: (0..30).map(|j| ["aa", "bb"][j % 2].to_string()).collect(),
            })
            .collect();
        let c = LabeledCorpus::new(docs, Split::Train).unwrap();
        let v = build_vocabulary(&c, 1).unwrap();
        let cfg = SgnsConfig {
            dim: 1,
            window: 1,
            negatives: 5,
            epochs: 20,
            subsample: 0.0,
            ..SgnsConfig::default()
        };
        let m = train_sgns(&c, &v, &cfg).unwrap();
        let cooc = crate::cooc::count_cooccurrences(&c, &v, 1).unwrap();
        let pmi = association::pmi(&cooc, 1.0).unwrap();
        let (a, b) = (v.id("aa").unwrap(), v.id("bb").unwrap());
        let target = pmi.get(a, b) - 5f64.ln();
        let dot = m.words.get(a as usize, 0) * m.contexts.get(b as usize, 0);
        assert_eq!(dot.signum(), target.signum());
    }

    fn planted_model(v: &Vocabulary, counts: &CoocCounts, k: f64) -> SgnsModel {
        let pmi = association::pmi(counts, 1.0).unwrap();
        // W = I and C_j[i] = PMI(i, j) − ln k, so W_i · C_j is the target exactly
        let n = v.len();
        let mut words = Dense::zeros(n, n);
        let mut contexts = Dense::zeros(n, n);
        for i in 0..n {
            words.set(i, i, 1.0);
            for j in 0..n {
                contexts.set(j, i, pmi.get(i as u32, j as u32) - k.ln());
            }
        }
        SgnsModel {
            words,
            contexts,
            config: SgnsConfig::default(),
            vocab_ref: v.fingerprint(),
        }
    }

    #[test]
    fn planted_factorization_scores_one() {
        let c = crate::synth::factorization_corpus(2);
        let v = build_vocabulary(&c, 1).unwrap();
        let counts = crate::cooc::count_cooccurrences(&c, &v, 5).unwrap();
        let check =
            check_implicit_factorization(&planted_model(&v, &counts, 5.0), &counts, 5.0, 50)
                .unwrap();
        assert!((check.spearman - 1.0).abs() < 1e-12);
        assert!(check.median_abs_error < 1e-12);
        assert!(check.pairs >= 500);
    }

    #[test]
    fn random_model_is_uncorrelated() {
        let c = crate::synth::factorization_corpus(2);
        let v = build_vocabulary(&c, 1).unwrap();
        let counts = crate::cooc::count_cooccurrences(&c, &v, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut random = |n, d| {
            Dense::from_vec(
                n,
                d,
                (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
        };
        let model = SgnsModel {
            words: random(v.len(), 25),
            contexts: random(v.len(), 25),
            config: SgnsConfig::default(),
            vocab_ref: v.fingerprint(),
        };
        let check = check_implicit_factorization(&model, &counts, 5.0, 50).unwrap();
        assert!(check.spearman.abs() < 0.2, "{check:?}");
    }

    #[test]
    fn too_few_pairs_is_an_error() {
        let c = toy_corpus();
        let v = build_vocabulary(&c, 1).unwrap();
        let counts = crate::cooc::count_cooccurrences(&c, &v, 3).unwrap();
        let model = planted_model(&v, &counts, 5.0);
        assert!(check_implicit_factorization(&model, &counts, 5.0, 1).is_err());
    }
}
