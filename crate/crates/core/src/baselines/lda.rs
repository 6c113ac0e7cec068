//! Latent Dirichlet allocation by collapsed Gibbs sampling.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, LabeledCorpus, Split, Vocabulary};
use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::factorize::{csv_err, DocVectors};
use crate::util;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub topics: usize,
    /// Document–topic prior; `None` means `50 / K`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    /// Gibbs sweeps per held-out document.
    pub infer_iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 50,
            alpha: None,
            beta: 0.01,
            iterations: 200,
            infer_iterations: 50,
            seed: 1,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    /// K × V topic–word distributions.
    pub phi: Dense,
    /// Training-document topic mixtures, one row per training document.
    pub theta: Dense,
    pub alpha: f64,
    pub beta: f64,
    pub config: LdaConfig,
    pub vocab_ref: String,
}

impl LdaModel {
    pub fn topics(&self) -> usize {
        self.phi.n_rows()
    }
}

/// θ from document–topic counts: the posterior mode when `α > 1`, else the smoothed mean.
pub fn theta_from_counts(n_dk: &[f64], alpha: f64) -> Vec<f64> {
    let k = n_dk.len() as f64;
    let n_d: f64 = n_dk.iter().sum();
    if alpha > 1.0 {
        let z = n_d + k * (alpha - 1.0);
        n_dk.iter().map(|&n| (n + alpha - 1.0) / z).collect()
    } else {
        let z = n_d + k * alpha;
        n_dk.iter().map(|&n| (n + alpha) / z).collect()
    }
}

struct Chain {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<u32>>,
    z: Vec<Vec<u16>>,
    n_dk: Vec<Vec<u32>>,
    n_kw: Vec<u32>,
    n_k: Vec<u32>,
}

impl Chain {
    fn init(
        docs: Vec<Vec<u32>>,
        k: usize,
        v: usize,
        alpha: f64,
        beta: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let mut chain = Chain {
            k,
            v,
            alpha,
            beta,
            z: Vec::with_capacity(docs.len()),
            n_dk: vec![vec![0; k]; docs.len()],
            n_kw: vec![0; k * v],
            n_k: vec![0; k],
            docs: Vec::new(),
        };
        for (d, doc) in docs.iter().enumerate() {
            let zs: Vec<u16> = doc.iter().map(|_| rng.random_range(0..k) as u16).collect();
            for (&w, &t) in doc.iter().zip(&zs) {
                chain.n_dk[d][t as usize] += 1;
                chain.n_kw[t as usize * v + w as usize] += 1;
                chain.n_k[t as usize] += 1;
            }
            chain.z.push(zs);
        }
        chain.docs = docs;
        chain
    }

    fn sweep(&mut self, rng: &mut impl Rng, probs: &mut [f64]) {
        let vbeta = self.v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i] as usize;
                let old = self.z[d][i] as usize;
                self.n_dk[d][old] -= 1;
                self.n_kw[old * self.v + w] -= 1;
                self.n_k[old] -= 1;
                let mut total = 0.0;
                for t in 0..self.k {
                    total += (self.n_dk[d][t] as f64 + self.alpha)
                        * (self.n_kw[t * self.v + w] as f64 + self.beta)
                        / (self.n_k[t] as f64 + vbeta);
                    probs[t] = total;
                }
                let new = draw(probs, total, rng);
                self.z[d][i] = new as u16;
                self.n_dk[d][new] += 1;
                self.n_kw[new * self.v + w] += 1;
                self.n_k[new] += 1;
            }
        }
    }

    /// Token conservation: every document's topic counts sum to its length,
    /// and the topic–word table accounts for every token.
    fn counts_consistent(&self) -> bool {
        let docs_ok =
            self.docs.iter().zip(&self.n_dk).all(|(doc, counts)| {
                counts.iter().map(|&c| c as usize).sum::<usize>() == doc.len()
            });
        let tokens: usize = self.docs.iter().map(Vec::len).sum();
        let kw: usize = self.n_kw.iter().map(|&c| c as usize).sum();
        let k: usize = self.n_k.iter().map(|&c| c as usize).sum();
        docs_ok && kw == tokens && k == tokens
    }

    fn phi(&self) -> Dense {
        let vbeta = self.v as f64 * self.beta;
        let mut phi = Dense::zeros(self.k, self.v);
        for t in 0..self.k {
            let z = self.n_k[t] as f64 + vbeta;
            for w in 0..self.v {
                phi.set(t, w, (self.n_kw[t * self.v + w] as f64 + self.beta) / z);
            }
        }
        phi
    }
}

/// Samples an index from unnormalized cumulative weights.
fn draw(cumulative: &[f64], total: f64, rng: &mut impl Rng) -> usize {
    let u = rng.random::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

fn check_config(config: &LdaConfig) -> Result<()> {
    if config.topics < 1 || config.topics > u16::MAX as usize {
        return Err(Error::invalid(format!(
            "topic count {} out of range",
            config.topics
        )));
    }
    if config.iterations < 1 {
        return Err(Error::invalid("LDA needs at least one iteration"));
    }
    if !(config.alpha() > 0.0) || !(config.beta > 0.0) {
        return Err(Error::invalid("LDA priors must be positive"));
    }
    Ok(())
}

/// Trains on the training split. A single topic is accepted as a degenerate case.
pub fn train_lda(
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
    config: &LdaConfig,
) -> Result<LdaModel> {
    train_lda_with(corpus, vocab, config, |_, _| {})
}

/// As [`train_lda`], calling `inspect(sweep, consistent)` after every sweep with the
/// outcome of the token-conservation check.
pub fn train_lda_with(
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
    config: &LdaConfig,
    mut inspect: impl FnMut(usize, bool),
) -> Result<LdaModel> {
    check_config(config)?;
    if corpus.split != Split::Train {
        return Err(Error::invalid("LDA is trained on the training split"));
    }
    if corpus.is_empty() {
        return Err(Error::invalid("empty corpus"));
    }
    let docs: Vec<Vec<u32>> = corpus
        .documents
        .iter()
        .map(|d| vocab.encode(&d.tokens))
        .collect();
    let alpha = config.alpha();
    let mut rng = util::rng_for(config.seed, "lda");
    let mut chain = Chain::init(
        docs,
        config.topics,
        vocab.len(),
        alpha,
        config.beta,
        &mut rng,
    );
    let mut probs = vec![0.0; config.topics];
    for it in 0..config.iterations {
        chain.sweep(&mut rng, &mut probs);
        inspect(it, chain.counts_consistent());
    }
    let mut theta = Dense::zeros(chain.docs.len(), config.topics);
    for (d, counts) in chain.n_dk.iter().enumerate() {
        let c: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        theta
            .row_mut(d)
            .copy_from_slice(&theta_from_counts(&c, alpha));
    }
    Ok(LdaModel {
        phi: chain.phi(),
        theta,
        alpha,
        beta: config.beta,
        config: config.clone(),
        vocab_ref: vocab.fingerprint(),
    })
}

/// Held-out θ with φ fixed. Topic counts are averaged over the second half of
/// the sweeps. Returns `None` alongside a uniform vector when the document has no
/// in-vocabulary token.
pub fn infer_theta(
    model: &LdaModel,
    doc: &Document,
    vocab: &Vocabulary,
    iterations: usize,
) -> (Vec<f64>, bool) {
    let k = model.topics();
    let ids = vocab.encode(&doc.tokens);
    if ids.is_empty() {
        return (vec![1.0 / k as f64; k], false);
    }
    let mut rng = util::rng_for(model.config.seed, &format!("infer-{}", doc.id));
    let mut n_dk = vec![0.0; k];
    let mut z: Vec<usize> = ids
        .iter()
        .map(|_| {
            let t = rng.random_range(0..k);
            n_dk[t] += 1.0;
            t
        })
        .collect();
    let iterations = iterations.max(1);
    let burn = iterations / 2;
    let mut acc = vec![0.0; k];
    let mut probs = vec![0.0; k];
    for it in 0..iterations {
        for (i, &w) in ids.iter().enumerate() {
            n_dk[z[i]] -= 1.0;
            let mut total = 0.0;
            for t in 0..k {
                total += (n_dk[t] + model.alpha) * model.phi.get(t, w as usize);
                probs[t] = total;
            }
            z[i] = draw(&probs, total, &mut rng);
            n_dk[z[i]] += 1.0;
        }
        if it >= burn {
            for (a, n) in acc.iter_mut().zip(&n_dk) {
                *a += n;
            }
        }
    }
    let samples = (iterations - burn) as f64;
    acc.iter_mut().for_each(|a| *a /= samples);
    (theta_from_counts(&acc, model.alpha), true)
}

/// θ features for a whole corpus. Training-split features are re-inferred like
/// test features so both sides come from the same estimator.
pub fn theta_features(model: &LdaModel, corpus: &LabeledCorpus, vocab: &Vocabulary) -> DocVectors {
    let rows: Vec<(Vec<f64>, bool)> = {
        use rayon::prelude::*;
        corpus
            .documents
            .par_iter()
            .map(|d| infer_theta(model, d, vocab, model.config.infer_iterations))
            .collect()
    };
    let k = model.topics();
    let mut matrix = Dense::zeros(rows.len(), k);
    let mut skipped = 0;
    for (i, (theta, ok)) in rows.iter().enumerate() {
        matrix.row_mut(i).copy_from_slice(theta);
        if !ok {
            skipped += 1;
        }
    }
    DocVectors {
        matrix,
        labels: corpus.documents.iter().map(|d| d.label.clone()).collect(),
        skipped,
    }
}

fn write_topic_csv(m: &Dense, row_names: &[String], first: &str, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![first.to_string()];
    header.extend((0..m.n_cols()).map(|c| format!("topic{c}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (name, row) in row_names.iter().zip(m.rows()) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|&v| util::fmt_f64(v)));
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    util::write_atomic(path, &bytes)
}

/// φ written transposed: one row per word, one column per topic.
pub fn write_phi_csv(model: &LdaModel, vocab: &Vocabulary, path: &Path) -> Result<()> {
    let (k, v) = (model.phi.n_rows(), model.phi.n_cols());
    let mut t = Dense::zeros(v, k);
    for i in 0..k {
        for j in 0..v {
            t.set(j, i, model.phi.get(i, j));
        }
    }
    write_topic_csv(&t, vocab.words(), "word", path)
}

/// θ with one row per document, labelled by document id.
pub fn write_theta_csv(theta: &Dense, ids: &[String], path: &Path) -> Result<()> {
    write_topic_csv(theta, ids, "doc", path)
}
