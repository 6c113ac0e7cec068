//! Low-frequency word reweighting.
//!
//! Each rare word `x` borrows association mass from its nearest frequent
//! neighbours `y ∈ S(x)`: for every context `c` stored in row `y`, the candidate
//! `sppmi(y, c) + ln r(x)` is offered to cell `(x, c)`, where
//! `r(x) = max(τ, W(x|c*) / ‖W(x|·)‖₂)` and `c*` maximizes the category
//! discriminability `W(x|c) = TF(x|c) · log2(N_c / max(DF(x|c̄), 1))`.
//! Cells only ever grow, and values stay nonnegative.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::association::{AssociationKind, AssociationMatrix};
use crate::corpus::{LabeledCorpus, Split, Vocabulary};
use crate::error::{Error, Result};
use crate::factorize::EmbeddingMatrix;
use crate::sparse::CsrMatrix;
use crate::util;

pub const DEFAULT_TAU: f64 = 0.05;
pub const DEFAULT_LOW_MAX_COUNT: u64 = 10;
pub const DEFAULT_NEIGHBORS: usize = 5;
pub const DEFAULT_HIGH_MIN_COUNT: u64 = 50;

/// Per (word, category) term frequency, out-of-category document frequency and `W(t|c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryStats {
    n_words: usize,
    n_categories: usize,
    pub categories: Vec<String>,
    /// Documents per category.
    pub category_docs: Vec<usize>,
    tf: Vec<u64>,
    df_out: Vec<u64>,
    weight: Vec<f64>,
    pub vocab_ref: String,
}

impl CategoryStats {
    /// Builds from raw tables (row-major `word × category`), deriving `W`.
    pub fn from_tables(
        categories: Vec<String>,
        category_docs: Vec<usize>,
        tf: Vec<u64>,
        df_out: Vec<u64>,
        vocab_ref: String,
    ) -> Result<Self> {
        let k = categories.len();
        if k < 2 {
            return Err(Error::invalid(
                "category statistics need at least two categories",
            ));
        }
        if category_docs.len() != k || !tf.len().is_multiple_of(k) || df_out.len() != tf.len() {
            return Err(Error::invalid("inconsistent category table shapes"));
        }
        let n_words = tf.len() / k;
        let weight = tf
            .iter()
            .zip(&df_out)
            .enumerate()
            .map(|(i, (&t, &df))| {
                if t == 0 {
                    0.0
                } else {
                    let nc = category_docs[i % k] as f64;
                    t as f64 * (nc / df.max(1) as f64).log2()
                }
            })
            .collect();
        Ok(CategoryStats {
            n_words,
            n_categories: k,
            categories,
            category_docs,
            tf,
            df_out,
            weight,
            vocab_ref,
        })
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn tf(&self, word: u32, category: usize) -> u64 {
        self.tf[word as usize * self.n_categories + category]
    }

    pub fn df_out(&self, word: u32, category: usize) -> u64 {
        self.df_out[word as usize * self.n_categories + category]
    }

    pub fn weight(&self, word: u32, category: usize) -> f64 {
        self.weight[word as usize * self.n_categories + category]
    }

    pub fn weights(&self, word: u32) -> &[f64] {
        let start = word as usize * self.n_categories;
        &self.weight[start..start + self.n_categories]
    }

    /// Raw `W(x|c*) / ‖W(x|·)‖₂` with `c*` the first maximizing category, or
    /// `None` for an all-zero row.
    pub fn discriminability_ratio(&self, word: u32) -> Option<f64> {
        let w = self.weights(word);
        let norm = util::norm(w);
        if norm == 0.0 {
            return None;
        }
        let best = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(best / norm)
    }

    /// The floored ratio `r(x) = max(τ, raw)`, or `None` for an all-zero row.
    pub fn effective_ratio(&self, word: u32, tau: f64) -> Option<f64> {
        self.discriminability_ratio(word).map(|r| r.max(tau))
    }
}

pub fn discriminability(corpus: &LabeledCorpus, vocab: &Vocabulary) -> Result<CategoryStats> {
    if corpus.split != Split::Train {
        return Err(Error::invalid(
            "category statistics are computed on the training split",
        ));
    }
    let k = corpus.categories.len();
    if k < 2 {
        return Err(Error::invalid(
            "category discriminability needs at least two categories",
        ));
    }
    let v = vocab.len();
    let mut tf = vec![0u64; v * k];
    let mut df_in = vec![0u64; v * k];
    let mut df_total = vec![0u64; v];
    let mut category_docs = vec![0usize; k];
    for (doc, c) in corpus.documents.iter().zip(corpus.label_indices()) {
        category_docs[c] += 1;
        let mut present = HashSet::new();
        for id in vocab.encode(&doc.tokens) {
            tf[id as usize * k + c] += 1;
            present.insert(id);
        }
        for id in present {
            df_in[id as usize * k + c] += 1;
            df_total[id as usize] += 1;
        }
    }
    let df_out = (0..v * k).map(|i| df_total[i / k] - df_in[i]).collect();
    CategoryStats::from_tables(
        corpus.categories.clone(),
        category_docs,
        tf,
        df_out,
        vocab.fingerprint(),
    )
}

/// Word ids whose training count is at most `max_count`, ascending.
pub fn select_low_frequency(vocab: &Vocabulary, max_count: u64) -> Result<Vec<u32>> {
    if max_count < 1 {
        return Err(Error::invalid("low-frequency threshold must be at least 1"));
    }
    Ok((0..vocab.len() as u32)
        .filter(|&id| vocab.count(id) <= max_count)
        .collect())
}

fn cosine(a: &[f64], a_norm: f64, b: &[f64]) -> f64 {
    let bn = util::norm(b);
    if a_norm == 0.0 || bn == 0.0 {
        0.0
    } else {
        util::dot(a, b) / (a_norm * bn)
    }
}

/// The `n` most cosine-similar words to `x` among words with count ≥ `min_count`,
/// excluding `x`. Descending similarity, ties by lower id. A zero vector for `x`
/// yields an empty list.
pub fn select_similar(
    x: u32,
    base: &EmbeddingMatrix,
    n: usize,
    min_count: u64,
    vocab: &Vocabulary,
) -> Result<Vec<(u32, f64)>> {
    if x as usize >= vocab.len() {
        return Err(Error::invalid(format!("word id {x} not in vocabulary")));
    }
    if base.matrix.n_rows() != vocab.len() {
        return Err(Error::VocabularyMismatch(
            "base embedding does not index the vocabulary".into(),
        ));
    }
    let xv = base.vector(x);
    let xn = util::norm(xv);
    if xn == 0.0 {
        log::debug!(
            "word {:?} has a zero embedding; no similar words",
            vocab.word(x)
        );
        return Ok(Vec::new());
    }
    let mut scored: Vec<(u32, f64)> = (0..vocab.len() as u32)
        .filter(|&y| y != x && vocab.count(y) >= min_count)
        .map(|y| (y, cosine(xv, xn, base.vector(y))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(n);
    Ok(scored)
}

/// Rare word → its frequent neighbours with similarity scores.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimilarPairs {
    pub pairs: BTreeMap<u32, Vec<(u32, f64)>>,
    pub vocab_ref: String,
}

impl SimilarPairs {
    /// `x<TAB>y1:sim1,y2:sim2,…` per rare word.
    pub fn dump(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        let mut s = String::new();
        for (x, ys) in &self.pairs {
            s.push_str(vocab.word(*x));
            s.push('\t');
            let parts: Vec<String> = ys
                .iter()
                .map(|(y, sim)| format!("{}:{}", vocab.word(*y), util::fmt_f64(*sim)))
                .collect();
            s.push_str(&parts.join(","));
            let _ = writeln!(s);
        }
        util::write_atomic(path, s.as_bytes())
    }
}

pub fn build_similar_pairs(
    low: &[u32],
    base: &EmbeddingMatrix,
    n: usize,
    min_count: u64,
    vocab: &Vocabulary,
) -> Result<SimilarPairs> {
    let lists: Vec<(u32, Vec<(u32, f64)>)> = low
        .par_iter()
        .map(|&x| select_similar(x, base, n, min_count, vocab).map(|ys| (x, ys)))
        .collect::<Result<_>>()?;
    Ok(SimilarPairs {
        pairs: lists.into_iter().filter(|(_, ys)| !ys.is_empty()).collect(),
        vocab_ref: vocab.fingerprint(),
    })
}

/// Transfers neighbour mass into rare-word rows. Rows of words not in `pairs`
/// are copied unchanged.
pub fn reweight(
    sppmi: &AssociationMatrix,
    stats: &CategoryStats,
    pairs: &SimilarPairs,
    tau: f64,
) -> Result<AssociationMatrix> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!(
            "threshold τ = {tau} outside (0, 1)"
        )));
    }
    if sppmi.vocab_ref != stats.vocab_ref || sppmi.vocab_ref != pairs.vocab_ref {
        return Err(Error::VocabularyMismatch(format!(
            "matrix {}, stats {}, pairs {}",
            sppmi.vocab_ref, stats.vocab_ref, pairs.vocab_ref
        )));
    }
    let rows = &sppmi.rows;
    if rows.n_rows() != stats.n_words() {
        return Err(Error::VocabularyMismatch(format!(
            "{} matrix rows for {} words",
            rows.n_rows(),
            stats.n_words()
        )));
    }
    if sppmi.params.kind == AssociationKind::Pmi {
        return Err(Error::invalid(
            "reweighting needs a nonnegative PPMI-family matrix",
        ));
    }
    let new_rows: Vec<Vec<(u32, f64)>> = (0..rows.n_rows())
        .into_par_iter()
        .map(|w| {
            let original: Vec<(u32, f64)> = rows.row_entries(w).collect();
            let Some(ys) = pairs.pairs.get(&(w as u32)) else {
                return original;
            };
            let Some(r) = stats.effective_ratio(w as u32, tau) else {
                log::debug!("word id {w} has no category weight; row unchanged");
                return original;
            };
            let shift = r.ln();
            let mut cells: BTreeMap<u32, f64> = original.into_iter().collect();
            for &(y, _) in ys {
                for (c, v) in rows.row_entries(y as usize) {
                    let candidate = v + shift;
                    if candidate > 0.0 {
                        let cell = cells.entry(c).or_insert(0.0);
                        if candidate > *cell {
                            *cell = candidate;
                        }
                    }
                }
            }
            cells.into_iter().collect()
        })
        .collect();
    let mut params = sppmi.params;
    params.kind = AssociationKind::WlSppmi;
    Ok(AssociationMatrix {
        rows: CsrMatrix::from_rows(rows.n_cols(), new_rows)?,
        params,
        vocab_ref: sppmi.vocab_ref.clone(),
    })
}
