//! Deliberately naive reference implementations. They trade speed for
//! directness and back the property tests and the `selftest` command.

use std::collections::BTreeMap;

use rand::Rng;

use crate::classify::Metric;
use crate::corpus::{Document, LabeledCorpus, Split, Vocabulary};
use crate::dense::Dense;

/// Pair counts by the definition: every ordered position pair `(i, j)` with
/// `0 < |i − j| ≤ window` where both tokens are in the vocabulary.
pub fn cooc_double_loop(
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
    window: usize,
) -> BTreeMap<(u32, u32), u64> {
    let mut out = BTreeMap::new();
    for doc in &corpus.documents {
        let n = doc.tokens.len();
        for i in 0..n {
            for j in 0..n {
                if i == j || i.abs_diff(j) > window {
                    continue;
                }
                if let (Some(w), Some(c)) = (vocab.id(&doc.tokens[i]), vocab.id(&doc.tokens[j])) {
                    *out.entry((w, c)).or_insert(0) += 1;
                }
            }
        }
    }
    out
}

/// PMI-family values recomputed from a pair table in the log domain:
/// `ln #(w,c) + ln Z_α − ln #(w) − α ln #(c) − shift`, clamped at zero when
/// `clamp` is set. Cells that clamp to zero are omitted.
pub fn association_reference(
    pairs: &BTreeMap<(u32, u32), u64>,
    alpha: f64,
    shift: f64,
    clamp: bool,
) -> BTreeMap<(u32, u32), f64> {
    let mut word: BTreeMap<u32, f64> = BTreeMap::new();
    let mut ctx: BTreeMap<u32, f64> = BTreeMap::new();
    for (&(w, c), &n) in pairs {
        *word.entry(w).or_insert(0.0) += n as f64;
        *ctx.entry(c).or_insert(0.0) += n as f64;
    }
    let z: f64 = ctx.values().map(|n| n.powf(alpha)).sum();
    pairs
        .iter()
        .filter_map(|(&(w, c), &n)| {
            let v = (n as f64).ln() + z.ln() - word[&w].ln() - alpha * ctx[&c].ln() - shift;
            if clamp && v <= 0.0 {
                None
            } else {
                Some(((w, c), v))
            }
        })
        .collect()
}

/// Low-frequency reweighting over dense rows. `tf`, `df_out` are `word × category`
/// tables and `pairs` maps each rare word to its neighbours.
pub fn reweight_reference(
    rows: &[Vec<f64>],
    tf: &[Vec<u64>],
    df_out: &[Vec<u64>],
    category_docs: &[usize],
    pairs: &BTreeMap<u32, Vec<u32>>,
    tau: f64,
) -> Vec<Vec<f64>> {
    let mut out = rows.to_vec();
    for (&x, ys) in pairs {
        let Some(r) = ratio_reference(&tf[x as usize], &df_out[x as usize], category_docs) else {
            continue;
        };
        let r = r.max(tau);
        for &y in ys {
            for (c, &v) in rows[y as usize].iter().enumerate() {
                let cand = v + r.ln();
                if cand > out[x as usize][c] {
                    out[x as usize][c] = cand;
                }
            }
        }
    }
    out
}

/// `max_c W(x|c) / ‖W(x|·)‖₂`, or `None` when every weight is zero.
pub fn ratio_reference(tf: &[u64], df_out: &[u64], category_docs: &[usize]) -> Option<f64> {
    let weights: Vec<f64> = (0..tf.len())
        .map(|c| {
            if tf[c] == 0 {
                0.0
            } else {
                tf[c] as f64 * (category_docs[c] as f64 / df_out[c].max(1) as f64).log2()
            }
        })
        .collect();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    Some(weights.iter().copied().fold(f64::NEG_INFINITY, f64::max) / norm)
}

/// Full sort of every training row per query, then a vote over the first `k`.
pub fn knn_brute_force(
    train_x: &Dense,
    train_y: &[usize],
    query_x: &Dense,
    k: usize,
    metric: Metric,
) -> Vec<usize> {
    let n_classes = train_y.iter().max().map_or(1, |m| m + 1);
    query_x
        .rows()
        .map(|q| {
            let mut all: Vec<(f64, usize)> = train_x
                .rows()
                .enumerate()
                .map(|(i, r)| {
                    let d = match metric {
                        Metric::Euclidean => q
                            .iter()
                            .zip(r)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt(),
                        Metric::Cosine => {
                            let qn = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                            if qn == 0.0 || rn == 0.0 {
                                1.0
                            } else {
                                1.0 - q.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() / (qn * rn)
                            }
                        }
                    };
                    (d, i)
                })
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes = vec![0usize; n_classes];
            for &(_, i) in all.iter().take(k) {
                votes[train_y[i]] += 1;
            }
            let top = *votes.iter().max().expect("at least one class");
            votes.iter().position(|&v| v == top).expect("max present")
        })
        .collect()
}

/// Random training corpus with at most `max_tokens` tokens drawn from at most
/// `max_words` distinct letter-only words.
pub fn random_corpus(rng: &mut impl Rng, max_tokens: usize, max_words: usize) -> LabeledCorpus {
    let words = rng.random_range(2..=max_words);
    let n_docs = rng.random_range(1..=8);
    let budget = rng.random_range(n_docs..=max_tokens);
    let mut lengths = vec![budget / n_docs; n_docs];
    lengths[0] += budget % n_docs;
    let documents = lengths
        .into_iter()
        .enumerate()
        .map(|(d, len)| Document {
            id: format!("doc{d}"),
            label: "any".into(),
            tokens: (0..len)
                .map(|_| {
                    // skewed draw so some words stay rare
                    let u: f64 = rng.random();
                    let i = ((u * u) * words as f64) as usize;
                    word_name(i.min(words - 1))
                })
                .collect(),
        })
        .collect();
    LabeledCorpus::new(documents, Split::Train).expect("nonempty labels")
}

fn word_name(i: usize) -> String {
    format!(
        "w{}{}",
        (b'a' + (i / 26) as u8) as char,
        (b'a' + (i % 26) as u8) as char
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocabulary;

    #[test]
    fn double_loop_small_case() {
        let corpus = LabeledCorpus::new(
            vec![Document {
                id: "d".into(),
                label: "x".into(),
                tokens: ["aa", "bb", "aa"].iter().map(|s| s.to_string()).collect(),
            }],
            Split::Train,
        )
        .unwrap();
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        let (a, b) = (vocab.id("aa").unwrap(), vocab.id("bb").unwrap());
        let counts = cooc_double_loop(&corpus, &vocab, 1);
        assert_eq!(counts[&(a, b)], 2);
        assert_eq!(counts[&(b, a)], 2);
        assert!(!counts.contains_key(&(a, a)));
        assert_eq!(cooc_double_loop(&corpus, &vocab, 2)[&(a, a)], 2);
    }

    #[test]
    fn reference_ln2() {
        let pairs: BTreeMap<(u32, u32), u64> = [
            ((0, 1), 2),
            ((0, 2), 2),
            ((1, 3), 1),
            ((2, 3), 1),
            ((3, 0), 2),
        ]
        .into_iter()
        .collect();
        let v = association_reference(&pairs, 1.0, 0.0, false);
        assert!((v[&(0, 1)] - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn random_corpus_respects_limits() {
        let mut rng = crate::util::rng_for(1, "t");
        for _ in 0..20 {
            let c = random_corpus(&mut rng, 1000, 50);
            assert!(c.total_tokens() <= 1000);
            assert!(build_vocabulary(&c, 1).unwrap().len() <= 50);
        }
    }
}
