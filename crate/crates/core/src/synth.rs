//! Seeded synthetic corpora: planted-topic collections for oracle tests and a
//! labelled benchmark with a long tail of rare words for offline experiments.
//!
//! Generated words consist of lowercase letters only, so they survive the
//! tokenizer unchanged when written out and re-read.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::LdaModel;
use crate::corpus::{Document, LabeledCorpus, Split};
use crate::error::{Error, Result};
use crate::util;

fn base26(mut i: usize, width: usize) -> String {
    let mut out = vec![b'a'; width];
    for slot in out.iter_mut().rev() {
        *slot = b'a' + (i % 26) as u8;
        i /= 26;
    }
    String::from_utf8(out).expect("ascii")
}

fn letter(i: usize) -> char {
    (b'a' + (i % 26) as u8) as char
}

/// The `i`-th word of planted topic `t`.
pub fn topic_word(t: usize, i: usize) -> String {
    format!("top{}{}", letter(t), base26(i, 3))
}

/// Words per planted topic in [`planted_topics`].
pub const PLANTED_TOPIC_WORDS: usize = 25;

/// Two topics over disjoint vocabularies; each document is drawn uniformly
/// from one topic, which is also its label (`t0` or `t1`).
pub fn planted_topics(n_docs: usize, doc_len: usize, seed: u64) -> LabeledCorpus {
    let mut rng = util::rng_for(seed, "planted-topics");
    let documents = (0..n_docs)
        .map(|d| {
            let t = d % 2;
            Document {
                id: format!("doc{d}"),
                label: format!("t{t}"),
                tokens: (0..doc_len)
                    .map(|_| topic_word(t, rng.random_range(0..PLANTED_TOPIC_WORDS)))
                    .collect(),
            }
        })
        .collect();
    LabeledCorpus::new(documents, Split::Train).expect("nonempty labels")
}

/// Fraction of documents whose argmax-θ topic agrees with the majority label of that topic.
pub fn topic_purity(model: &LdaModel, corpus: &LabeledCorpus) -> f64 {
    let k = model.topics();
    let labels = corpus.label_indices();
    let mut table = vec![vec![0usize; corpus.categories.len()]; k];
    for (row, &label) in model.theta.rows().zip(&labels) {
        let best = row
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            )
            .0;
        table[best][label] += 1;
    }
    let hits: usize = table
        .iter()
        .map(|r| r.iter().copied().max().unwrap_or(0))
        .sum();
    hits as f64 / labels.len().max(1) as f64
}

fn zipf_weights(n: usize, exponent: f64) -> Vec<f64> {
    (1..=n).map(|r| 1.0 / (r as f64).powf(exponent)).collect()
}

/// Unlabelled corpus with a 50-word vocabulary and about 100k tokens, drawn from
/// five overlapping Zipfian topics so word associations span a wide PMI range.
pub fn factorization_corpus(seed: u64) -> LabeledCorpus {
    let vocab = 50;
    let mut rng = util::rng_for(seed, "factorization-corpus");
    let topics: Vec<(Vec<usize>, WeightedIndex<f64>)> = (0..5)
        .map(|_| {
            let mut order: Vec<usize> = (0..vocab).collect();
            order.shuffle(&mut rng);
            (
                order,
                WeightedIndex::new(zipf_weights(vocab, 1.1)).expect("weights"),
            )
        })
        .collect();
    let documents = (0..1000)
        .map(|d| {
            let main = rng.random_range(0..topics.len());
            let tokens = (0..100)
                .map(|_| {
                    let t = if rng.random::<f64>() < 0.8 {
                        main
                    } else {
                        rng.random_range(0..topics.len())
                    };
                    let (order, dist) = &topics[t];
                    format!("word{}", base26(order[dist.sample(&mut rng)], 2))
                })
                .collect();
            Document {
                id: format!("doc{d}"),
                label: "all".into(),
                tokens,
            }
        })
        .collect();
    LabeledCorpus::new(documents, Split::Train).expect("nonempty labels")
}

/// Shape of the synthetic classification benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub categories: usize,
    pub train_per_category: usize,
    pub test_per_category: usize,
    pub doc_len: usize,
    /// Background words shared by every category.
    pub shared_words: usize,
    /// Frequent words specific to each category.
    pub topical_words: usize,
    /// Rare words specific to each category.
    pub rare_words: usize,
    /// Probability that a token is drawn from the document's own category.
    pub topical_rate: f64,
    /// Probability that a token is a rare word of the document's category.
    pub rare_rate: f64,
    /// Probability that a topical token comes from another, random category.
    pub confusion: f64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            categories: 4,
            train_per_category: 150,
            test_per_category: 100,
            doc_len: 60,
            shared_words: 400,
            topical_words: 60,
            rare_words: 120,
            topical_rate: 0.12,
            rare_rate: 0.03,
            confusion: 0.35,
        }
    }
}

impl BenchmarkSpec {
    fn validate(&self) -> Result<()> {
        if self.categories < 2 || self.categories > 26 {
            return Err(Error::invalid(
                "synthetic benchmark needs 2 to 26 categories",
            ));
        }
        if self.train_per_category == 0 || self.test_per_category == 0 || self.doc_len == 0 {
            return Err(Error::invalid("synthetic benchmark sizes must be positive"));
        }
        if self.shared_words == 0 || self.topical_words == 0 || self.rare_words == 0 {
            return Err(Error::invalid("synthetic vocabularies must be nonempty"));
        }
        let rates = [self.topical_rate, self.rare_rate, self.confusion];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r))
            || self.topical_rate + self.rare_rate > 1.0
        {
            return Err(Error::invalid(
                "synthetic benchmark rates must be probabilities",
            ));
        }
        Ok(())
    }
}

/// Category names used by [`benchmark`]: `cata`, `catb`, ...
pub fn benchmark_category(c: usize) -> String {
    format!("cat{}", letter(c))
}

/// Train and test splits of the synthetic benchmark.
pub fn benchmark(spec: &BenchmarkSpec, seed: u64) -> Result<(LabeledCorpus, LabeledCorpus)> {
    spec.validate()?;
    let shared = WeightedIndex::new(zipf_weights(spec.shared_words, 1.0)).expect("weights");
    let topical = WeightedIndex::new(zipf_weights(spec.topical_words, 0.8)).expect("weights");
    let make = |split: Split, per_category: usize| -> Result<LabeledCorpus> {
        let mut rng = util::rng_for(seed, &format!("benchmark-{split}"));
        let mut documents = Vec::with_capacity(per_category * spec.categories);
        for i in 0..per_category {
            for c in 0..spec.categories {
                let tokens = (0..spec.doc_len)
                    .map(|_| {
                        let u = rng.random::<f64>();
                        if u < spec.rare_rate {
                            format!(
                                "rar{}{}",
                                letter(c),
                                base26(rng.random_range(0..spec.rare_words), 3)
                            )
                        } else if u < spec.rare_rate + spec.topical_rate {
                            let from = if rng.random::<f64>() < spec.confusion {
                                rng.random_range(0..spec.categories)
                            } else {
                                c
                            };
                            format!("top{}{}", letter(from), base26(topical.sample(&mut rng), 3))
                        } else {
                            format!("bgw{}", base26(shared.sample(&mut rng), 3))
                        }
                    })
                    .collect();
                documents.push(Document {
                    id: format!("{}/{split}{i}", benchmark_category(c)),
                    label: benchmark_category(c),
                    tokens,
                });
            }
        }
        LabeledCorpus::new(documents, split)
    };
    Ok((
        make(Split::Train, spec.train_per_category)?,
        make(Split::Test, spec.test_per_category)?,
    ))
}
