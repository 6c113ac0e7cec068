//! Symmetric sliding-window word–context co-occurrence counts.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::corpus::{LabeledCorpus, Split, Vocabulary};
use crate::error::{Error, Result};
use crate::sparse::{self, CsrMatrix, MmField};

pub const DEFAULT_WINDOW: usize = 5;

/// Sparse `#(w,c)` counts with marginals `#(w)`, `#(c)` and total `|D|`.
///
/// Words and contexts share one vocabulary, so the matrix is square.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocCounts {
    /// Integer counts stored as `f64`; only positive cells are present.
    pub counts: CsrMatrix,
    pub word_marginal: Vec<u64>,
    pub ctx_marginal: Vec<u64>,
    pub total_pairs: u64,
    pub window: usize,
    pub vocab_ref: String,
}

impl CoocCounts {
    pub fn vocab_size(&self) -> usize {
        self.counts.n_rows()
    }

    pub fn count(&self, w: u32, c: u32) -> u64 {
        self.counts.get(w as usize, c).map_or(0, |v| v as u64)
    }

    fn from_rows(rows: Vec<Vec<(u32, f64)>>, window: usize, vocab_ref: String) -> Result<Self> {
        let n = rows.len();
        let counts = CsrMatrix::from_rows(n, rows)?;
        let mut word_marginal = vec![0u64; n];
        let mut ctx_marginal = vec![0u64; n];
        for (w, c, v) in counts.iter() {
            word_marginal[w] += v as u64;
            ctx_marginal[c as usize] += v as u64;
        }
        let total_pairs = word_marginal.iter().sum();
        Ok(CoocCounts {
            counts,
            word_marginal,
            ctx_marginal,
            total_pairs,
            window,
            vocab_ref,
        })
    }

    /// MatrixMarket integer file; a comment line records window, `|D|` and the vocabulary.
    pub fn write(&self, path: &Path, vocab_path: Option<&Path>) -> Result<()> {
        let vocab_path = vocab_path.map_or_else(|| "-".to_string(), |p| p.display().to_string());
        let header = format!(
            "window={} total_pairs={} vocab_ref={} vocab={}",
            self.window, self.total_pairs, self.vocab_ref, vocab_path
        );
        sparse::write_matrix_market(&self.counts, MmField::Integer, &[header], path)
    }

    /// Reads a counts file and the vocabulary path it records, if any.
    pub fn read(path: &Path) -> Result<(Self, Option<PathBuf>)> {
        let (m, comments) = sparse::read_matrix_market(path)?;
        let mut window = None;
        let mut vocab_ref = String::new();
        let mut vocab_path = None;
        let mut declared_total = None;
        for c in &comments {
            for (k, v) in sparse::parse_kv(c) {
                match k.as_str() {
                    "window" => window = v.parse().ok(),
                    "total_pairs" => declared_total = v.parse::<u64>().ok(),
                    "vocab_ref" => vocab_ref = v,
                    "vocab" if v != "-" => vocab_path = Some(PathBuf::from(v)),
                    _ => {}
                }
            }
        }
        let window = window.ok_or_else(|| Error::parse(path, 2, "missing window in header"))?;
        if m.n_rows() != m.n_cols() {
            return Err(Error::parse(path, 2, "co-occurrence matrix must be square"));
        }
        let rows = (0..m.n_rows())
            .map(|r| m.row_entries(r).collect())
            .collect();
        let counts = Self::from_rows(rows, window, vocab_ref)?;
        if let Some(t) = declared_total {
            if t != counts.total_pairs {
                return Err(Error::parse(path, 2, "total_pairs does not match entries"));
            }
        }
        Ok((counts, vocab_path))
    }
}

/// Counts every ordered pair of in-vocabulary tokens at distance `1..=window`
/// within a document. Out-of-vocabulary tokens still occupy positions.
pub fn count_cooccurrences(
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
    window: usize,
) -> Result<CoocCounts> {
    if window < 1 {
        return Err(Error::invalid("window must be at least 1"));
    }
    if corpus.split != Split::Train {
        return Err(Error::invalid(
            "co-occurrences are counted on the training split",
        ));
    }
    if corpus.is_empty() {
        return Err(Error::invalid("empty corpus"));
    }
    let merged: HashMap<(u32, u32), u64> = corpus
        .documents
        .par_iter()
        .fold(HashMap::new, |mut acc, doc| {
            let ids: Vec<Option<u32>> = doc.tokens.iter().map(|t| vocab.id(t)).collect();
            for (i, wi) in ids.iter().enumerate() {
                let Some(w) = *wi else { continue };
                let hi = (i + window).min(ids.len() - 1);
                for cj in &ids[i + 1..=hi] {
                    if let Some(c) = *cj {
                        *acc.entry((w, c)).or_insert(0) += 1;
                        *acc.entry((c, w)).or_insert(0) += 1;
                    }
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            if a.len() < b.len() {
                return merge_into(b, a);
            }
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); vocab.len()];
    for ((w, c), n) in merged {
        rows[w as usize].push((c, n as f64));
    }
    CoocCounts::from_rows(rows, window, vocab.fingerprint())
}

fn merge_into(
    mut big: HashMap<(u32, u32), u64>,
    small: HashMap<(u32, u32), u64>,
) -> HashMap<(u32, u32), u64> {
    for (k, v) in small {
        *big.entry(k).or_insert(0) += v;
    }
    big
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, Document};

    fn corpus(docs: &[&[&str]]) -> LabeledCorpus {
        let documents = docs
            .iter()
            .enumerate()
            .map(|(i, t)| Document {
                id: i.to_string(),
                label: "x".into(),
                tokens: t.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        LabeledCorpus::new(documents, Split::Train).unwrap()
    }

    #[test]
    fn aba_window_one() {
        let c = corpus(&[&["a", "b", "a"]]);
        let v = build_vocabulary(&c, 1).unwrap();
        let m = count_cooccurrences(&c, &v, 1).unwrap();
        let (a, b) = (v.id("a").unwrap(), v.id("b").unwrap());
        assert_eq!(m.count(a, b), 2);
        assert_eq!(m.count(b, a), 2);
        assert_eq!(m.count(a, a), 0);
        assert_eq!(m.total_pairs, 4);
        assert_eq!(m.word_marginal[a as usize], 2);
        assert_eq!(m.word_marginal[b as usize], 2);
    }

    #[test]
    fn single_token_document_has_no_pairs() {
        let c = corpus(&[&["a"], &["b", "c"]]);
        let v = build_vocabulary(&c, 1).unwrap();
        let m = count_cooccurrences(&c, &v, 3).unwrap();
        assert_eq!(m.total_pairs, 2);
        assert_eq!(m.word_marginal[v.id("a").unwrap() as usize], 0);
    }

    #[test]
    fn abc_window_two() {
        let c = corpus(&[&["a", "b", "c"]]);
        let v = build_vocabulary(&c, 1).unwrap();
        let m = count_cooccurrences(&c, &v, 2).unwrap();
        assert_eq!(m.total_pairs, 6);
        for x in ["a", "b", "c"] {
            for y in ["a", "b", "c"] {
                let want = u64::from(x != y);
                assert_eq!(m.count(v.id(x).unwrap(), v.id(y).unwrap()), want, "{x}{y}");
            }
        }
    }

    #[test]
    fn out_of_vocabulary_tokens_keep_their_position() {
        let c = corpus(&[&["a", "a", "b", "rare", "a"]]);
        let v = build_vocabulary(&c, 1).unwrap();
        let v2 = Vocabulary::from_counts(
            v.words()
                .iter()
                .filter(|w| *w != "rare")
                .map(|w| (w.clone(), v.count(v.id(w).unwrap())))
                .collect(),
        )
        .unwrap();
        let m = count_cooccurrences(&c, &v2, 1).unwrap();
        // b and the last a are two positions apart, so not paired at window 1
        assert_eq!(m.count(v2.id("b").unwrap(), v2.id("a").unwrap()), 1);
    }

    #[test]
    fn window_zero_rejected() {
        let c = corpus(&[&["a", "b"]]);
        let v = build_vocabulary(&c, 1).unwrap();
        assert!(count_cooccurrences(&c, &v, 0).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = corpus(&[&["a", "b", "a", "c", "b"]]);
        let v = build_vocabulary(&c, 1).unwrap();
        let m = count_cooccurrences(&c, &v, 2).unwrap();
        let path = dir.path().join("cooc.mtx");
        m.write(&path, Some(Path::new("vocab.tsv"))).unwrap();
        let (back, vocab_path) = CoocCounts::read(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(vocab_path.unwrap(), PathBuf::from("vocab.tsv"));
    }
}
