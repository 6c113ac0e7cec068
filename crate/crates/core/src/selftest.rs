//! Oracle and invariant suites, runnable from the CLI and from the acceptance tests.
//!
//! Every check returns `Ok(summary)` or `Err(first violation)`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::Rng;

use crate::association::{self, AssociationKind, AssociationMatrix, AssociationParams};
use crate::baselines::{lda, sgns};
use crate::classify::{self, Metric, RunMeta};
use crate::cooc;
use crate::corpus::build_vocabulary;
use crate::dense::Dense;
use crate::factorize::{self, DocVectors};
use crate::oracle;
use crate::sparse::CsrMatrix;
use crate::synth;
use crate::util;
use crate::wl::{self, CategoryStats, SimilarPairs};

pub type CheckResult = std::result::Result<String, String>;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub result: CheckResult,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.result.is_ok()
    }
}

fn fail<T>(msg: impl Into<String>) -> std::result::Result<T, String> {
    Err(msg.into())
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `count_cooccurrences` against the double-loop oracle on random small corpora.
pub fn counting(instances: usize, seed: u64) -> CheckResult {
    let mut rng = util::rng_for(seed, "selftest-counting");
    let mut cells = 0;
    for i in 0..instances {
        let corpus = oracle::random_corpus(&mut rng, 1000, 50);
        let min_count = rng.random_range(1..=2);
        let Ok(vocab) = build_vocabulary(&corpus, min_count) else {
            continue;
        };
        let window = rng.random_range(1..=5);
        let fast = cooc::count_cooccurrences(&corpus, &vocab, window).map_err(e2s)?;
        let slow = oracle::cooc_double_loop(&corpus, &vocab, window);
        let got: BTreeMap<(u32, u32), u64> = fast
            .counts
            .iter()
            .map(|(w, c, v)| ((w as u32, c), v as u64))
            .collect();
        if got != slow {
            return fail(format!(
                "instance {i} (window {window}): counts differ from the double loop"
            ));
        }
        let total: u64 = slow.values().sum();
        if fast.total_pairs != total {
            return fail(format!(
                "instance {i}: |D| = {} but oracle sums to {total}",
                fast.total_pairs
            ));
        }
        cells += slow.len();
    }
    Ok(format!("{instances} corpora, {cells} cells identical"))
}

/// Compares stored values with the reference after clamping; a cell whose exact
/// value sits on the clamp boundary may be stored or dropped.
fn compare_assoc(
    m: &AssociationMatrix,
    reference: &BTreeMap<(u32, u32), f64>,
    clamp: bool,
    tol: f64,
    what: &str,
) -> std::result::Result<f64, String> {
    let mut worst: f64 = 0.0;
    for (w, c, _) in m.rows.iter() {
        if !reference.contains_key(&(w as u32, c)) {
            return fail(format!(
                "{what}: stored cell ({w}, {c}) has no co-occurrence"
            ));
        }
    }
    for (&(w, c), &v) in reference {
        let want = if clamp { v.max(0.0) } else { v };
        let got = m.rows.get(w as usize, c);
        if !clamp && got.is_none() {
            return fail(format!("{what}: cell ({w}, {c}) missing"));
        }
        let err = (got.unwrap_or(0.0) - want).abs();
        if !(err <= tol) {
            return fail(format!(
                "{what}: cell ({w}, {c}) = {got:?}, reference {want}"
            ));
        }
        worst = worst.max(err);
    }
    Ok(worst)
}

/// PMI, PPMI and SPPMI against a log-domain recomputation from the pair table.
pub fn association_formulas(instances: usize, seed: u64, tol: f64) -> CheckResult {
    let mut rng = util::rng_for(seed, "selftest-counting");
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let corpus = oracle::random_corpus(&mut rng, 1000, 50);
        let min_count = rng.random_range(1..=2);
        let Ok(vocab) = build_vocabulary(&corpus, min_count) else {
            continue;
        };
        let window = rng.random_range(1..=5);
        let counts = cooc::count_cooccurrences(&corpus, &vocab, window).map_err(e2s)?;
        if counts.total_pairs == 0 {
            continue;
        }
        let pairs = oracle::cooc_double_loop(&corpus, &vocab, window);
        for alpha in [1.0, 0.75] {
            let unshifted = oracle::association_reference(&pairs, alpha, 0.0, false);
            let p = association::pmi(&counts, alpha).map_err(e2s)?;
            worst = worst.max(compare_assoc(&p, &unshifted, false, tol, "pmi")?);
            let pp = association::ppmi(&counts, alpha).map_err(e2s)?;
            worst = worst.max(compare_assoc(&pp, &unshifted, true, tol, "ppmi")?);
            for (k, e) in [(5.0f64, 1.0), (5.0, 0.75), (2.0, 1.0)] {
                let s = association::sppmi(&counts, k, alpha, e).map_err(e2s)?;
                let reference = oracle::association_reference(&pairs, alpha, e * k.ln(), false);
                worst = worst.max(compare_assoc(&s, &reference, true, tol, "sppmi")?);
            }
            for m in [
                &pp,
                &association::sppmi(&counts, 5.0, alpha, 1.0).map_err(e2s)?,
            ] {
                if m.rows.iter().any(|(_, _, v)| !(v > 0.0)) {
                    return fail(format!(
                        "instance {i}: stored nonpositive value in {}",
                        m.params.kind
                    ));
                }
            }
            if association::sppmi(&counts, 1.0, alpha, 1.0)
                .map_err(e2s)?
                .rows
                != pp.rows
            {
                return fail(format!("instance {i}: sppmi with k = 1 differs from ppmi"));
            }
        }
    }
    Ok(format!("{instances} corpora, max |error| {worst:.2e}"))
}

struct WlInstance {
    rows: Vec<Vec<f64>>,
    tf: Vec<Vec<u64>>,
    df_out: Vec<Vec<u64>>,
    docs: Vec<usize>,
    pairs: BTreeMap<u32, Vec<u32>>,
    tau: f64,
}

impl WlInstance {
    fn random(rng: &mut impl Rng) -> Self {
        let v = rng.random_range(4..30);
        let k = rng.random_range(2..6);
        let rows = (0..v)
            .map(|_| {
                (0..v)
                    .map(|_| {
                        if rng.random::<f64>() < 0.3 {
                            rng.random_range(0.01..5.0)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let table = |rng: &mut dyn rand::RngCore, hi: u64| -> Vec<Vec<u64>> {
            (0..v)
                .map(|_| {
                    (0..k)
                        .map(|_| {
                            if rng.random::<f64>() < 0.4 {
                                0
                            } else {
                                rng.random_range(0..hi)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let tf = table(rng, 20);
        let df_out = table(rng, 15);
        let docs = (0..k).map(|_| rng.random_range(1..40)).collect();
        let n_low = rng.random_range(1..=v / 2);
        let pairs = index::sample(rng, v, n_low)
            .into_iter()
            .map(|x| {
                let n = rng.random_range(1..=5.min(v - 1));
                let ys = index::sample(rng, v, n + 1)
                    .into_iter()
                    .filter(|&y| y != x)
                    .take(n)
                    .map(|y| y as u32)
                    .collect();
                (x as u32, ys)
            })
            .collect();
        let tau = [0.05, 0.1, 0.3][rng.random_range(0..3)];
        WlInstance {
            rows,
            tf,
            df_out,
            docs,
            pairs,
            tau,
        }
    }

    fn run(&self) -> std::result::Result<(CsrMatrix, CsrMatrix, CategoryStats), String> {
        let input = CsrMatrix::from_dense(&self.rows);
        let m = AssociationMatrix {
            rows: input.clone(),
            params: AssociationParams {
                kind: AssociationKind::Sppmi,
                k: 5.0,
                alpha: 1.0,
                shift_exponent: 1.0,
            },
            vocab_ref: "instance".into(),
        };
        let k = self.docs.len();
        let stats = CategoryStats::from_tables(
            (0..k).map(|c| format!("c{c}")).collect(),
            self.docs.clone(),
            self.tf.concat(),
            self.df_out.concat(),
            "instance".into(),
        )
        .map_err(e2s)?;
        let pairs = SimilarPairs {
            pairs: self
                .pairs
                .iter()
                .map(|(&x, ys)| (x, ys.iter().map(|&y| (y, 1.0)).collect()))
                .collect(),
            vocab_ref: "instance".into(),
        };
        let out = wl::reweight(&m, &stats, &pairs, self.tau).map_err(e2s)?;
        Ok((input, out.rows, stats))
    }
}

/// Reweighting invariants on random instances, plus the `r = 1` transfer case.
pub fn wl_properties(instances: usize, seed: u64) -> CheckResult {
    let mut rng = util::rng_for(seed, "selftest-wl");
    for i in 0..instances {
        let inst = WlInstance::random(&mut rng);
        let (input, out, stats) = inst.run()?;
        let dense_in = input.to_dense();
        let dense_out = out.to_dense();
        for (r, (a, b)) in dense_in.iter().zip(&dense_out).enumerate() {
            if a.iter().zip(b).any(|(x, y)| y < x) {
                return fail(format!("instance {i}: row {r} decreased"));
            }
            if !inst.pairs.contains_key(&(r as u32)) && input.row(r) != out.row(r) {
                return fail(format!("instance {i}: untouched row {r} changed"));
            }
        }
        for &x in inst.pairs.keys() {
            if let Some(r) = stats.effective_ratio(x, inst.tau) {
                if !(r >= inst.tau && r <= 1.0 + 1e-12) {
                    return fail(format!("instance {i}: ratio {r} outside [τ, 1]"));
                }
            }
        }
        let reference = oracle::reweight_reference(
            &inst.rows,
            &inst.tf,
            &inst.df_out,
            &inst.docs,
            &inst.pairs,
            inst.tau,
        );
        for (r, (a, b)) in reference.iter().zip(&dense_out).enumerate() {
            if a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12) {
                return fail(format!("instance {i}: row {r} differs from the reference"));
            }
        }

        // single-category word (ratio exactly 1) with an empty row copies its neighbour
        let mut unit = inst;
        let (x, y) = (0u32, 1u32);
        unit.rows[0].iter_mut().for_each(|v| *v = 0.0);
        unit.tf[0] = vec![0; unit.docs.len()];
        unit.tf[0][0] = 3;
        unit.df_out[0][0] = 0;
        unit.docs[0] = unit.docs[0].max(2);
        unit.pairs = [(x, vec![y])].into_iter().collect();
        let (input, out, stats) = unit.run()?;
        if stats.effective_ratio(x, unit.tau) != Some(1.0) {
            return fail(format!("instance {i}: single-category ratio is not 1"));
        }
        if out.row(0) != input.row(1) {
            return fail(format!(
                "instance {i}: r = 1 did not transfer the neighbour row unchanged"
            ));
        }
    }
    Ok(format!("{instances} random instances"))
}

fn orthonormal_error(m: &Dense, by_columns: bool) -> f64 {
    let (n, d) = if by_columns {
        (m.n_rows(), m.n_cols())
    } else {
        (m.n_cols(), m.n_rows())
    };
    let at = |i: usize, k: usize| if by_columns { m.get(i, k) } else { m.get(k, i) };
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let dot: f64 = (0..n).map(|i| at(i, a) * at(i, b)).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).abs());
        }
    }
    worst
}

/// Rank-1 recovery, `diag(3,2,1)`, monotone reconstruction error and orthonormal factors.
pub fn svd_properties(seed: u64) -> CheckResult {
    let ov = factorize::DEFAULT_OVERSAMPLE;
    let pi = factorize::DEFAULT_POWER_ITERS;
    let mut rng = util::rng_for(seed, "selftest-svd");

    let u: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
    let v: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
    let rank1: Vec<Vec<f64>> = u
        .iter()
        .map(|a| v.iter().map(|b| a * b).collect())
        .collect();
    let m = CsrMatrix::from_dense(&rank1);
    let svd = factorize::truncated_svd(&m, 1, seed, ov, pi).map_err(e2s)?;
    let rec = svd.reconstruct();
    let err = rank1
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, x)| (i, j, *x)))
        .map(|(i, j, x)| (rec.get(i, j) - x).abs())
        .fold(0.0, f64::max);
    if err > 1e-10 {
        return fail(format!("rank-1 recovery error {err:e}"));
    }

    let diag = CsrMatrix::from_dense(&[
        vec![3.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ]);
    let s = factorize::truncated_svd(&diag, 2, seed, ov, pi).map_err(e2s)?;
    if (s.sigma[0] - 3.0).abs() > 1e-10 || (s.sigma[1] - 2.0).abs() > 1e-10 {
        return fail(format!("diag(3,2,1) gave {:?}", s.sigma));
    }

    let n = 40;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.random::<f64>() < 0.3 {
                        rng.random_range(0.0..3.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let m = CsrMatrix::from_dense(&rows);
    let mut prev = f64::INFINITY;
    let mut worst_orth: f64 = 0.0;
    for d in [1, 2, 4, 8, 16] {
        let s = factorize::truncated_svd(&m, d, seed, ov, pi).map_err(e2s)?;
        let e = factorize::reconstruction_error_sq(&m, &s);
        if e > prev * (1.0 + 1e-12) {
            return fail(format!(
                "reconstruction error rose from {prev} to {e} at d = {d}"
            ));
        }
        prev = e;
        worst_orth = worst_orth
            .max(orthonormal_error(&s.u, true))
            .max(orthonormal_error(&s.vt, false));
    }
    if worst_orth > 1e-8 {
        return fail(format!("factor orthonormality error {worst_orth:e}"));
    }
    Ok(format!(
        "rank-1 error {err:.1e}, orthonormality {worst_orth:.1e}"
    ))
}

/// Planted 2-topic corpus: purity, normalization and token conservation.
pub fn lda_recovery(docs: usize, doc_len: usize, iterations: usize, seed: u64) -> CheckResult {
    let corpus = synth::planted_topics(docs, doc_len, seed);
    let vocab = build_vocabulary(&corpus, 1).map_err(e2s)?;
    let cfg = lda::LdaConfig {
        topics: 2,
        iterations,
        seed,
        ..lda::LdaConfig::default()
    };
    let mut conserved = true;
    let model = lda::train_lda_with(&corpus, &vocab, &cfg, |_, ok| conserved &= ok).map_err(e2s)?;
    if !conserved {
        return fail("token counts not conserved by a sweep");
    }
    let row_err = model
        .phi
        .rows()
        .chain(model.theta.rows())
        .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    if row_err > 1e-9 {
        return fail(format!("θ/φ row sum off by {row_err:e}"));
    }
    let purity = synth::topic_purity(&model, &corpus);
    if purity < 0.9 {
        return fail(format!("topic purity {purity:.3} < 0.9"));
    }
    Ok(format!(
        "purity {purity:.3}, max row-sum error {row_err:.1e}"
    ))
}

/// KNN against the brute-force oracle on random instances of up to `max_points` rows.
pub fn knn_oracle(instances: usize, max_points: usize, seed: u64) -> CheckResult {
    let mut rng = util::rng_for(seed, "selftest-knn");
    for i in 0..instances {
        let n = rng.random_range(1..=max_points);
        let q = rng.random_range(1..=50);
        let d = rng.random_range(1..=8);
        let gridded = rng.random::<bool>();
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| {
                    if gridded {
                        rng.random_range(-2..3) as f64
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect()
        };
        let x = Dense::from_vec(n, d, draw(n * d));
        let qs = Dense::from_vec(q, d, draw(q * d));
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..5)).collect();
        let k = rng.random_range(1..=n.min(15));
        for metric in [Metric::Cosine, Metric::Euclidean] {
            let fast = classify::predict_knn(&x, &y, &qs, k, metric).map_err(e2s)?;
            if fast != oracle::knn_brute_force(&x, &y, &qs, k, metric) {
                return fail(format!(
                    "instance {i} ({metric:?}, n={n}, k={k}) disagrees with brute force"
                ));
            }
        }
    }
    Ok(format!("{instances} instances"))
}

/// Symmetric ±1 classes with unit variance put the decision boundary at 0.
pub fn nb_boundary() -> CheckResult {
    let x = DocVectors {
        matrix: Dense::from_rows(&[vec![-2.0], vec![0.0], vec![0.0], vec![2.0]]),
        labels: ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect(),
        skipped: 0,
    };
    let m = classify::train_nb(&x).map_err(e2s)?;
    let q = Dense::from_rows(&[vec![-1e-9], vec![1e-9], vec![-0.5], vec![0.5]]);
    let p = m.predict(&q).map_err(e2s)?;
    if p != vec![0, 1, 0, 1] {
        return fail(format!("predictions {p:?} around 0"));
    }
    Ok("boundary at 0".into())
}

/// Training accuracy on two 2-D blobs separated by a margin of at least 1.
pub fn svm_separable(seed: u64) -> CheckResult {
    let mut rng = util::rng_for(seed, "selftest-svm");
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let side = if i % 2 == 0 { 1.0 } else { -1.0 };
        rows.push(vec![
            side * rng.random_range(1.0..3.0),
            rng.random_range(-3.0..3.0),
        ]);
        labels.push(if side > 0.0 {
            "pos".to_string()
        } else {
            "neg".to_string()
        });
    }
    let data = DocVectors {
        matrix: Dense::from_rows(&rows),
        labels,
        skipped: 0,
    };
    let m = classify::train_svm(&data, 100, classify::DEFAULT_SVM_LAMBDA, seed).map_err(e2s)?;
    let acc = classify::evaluate(&m, &data, RunMeta::default())
        .map_err(e2s)?
        .accuracy;
    if acc < 1.0 {
        return fail(format!("training accuracy {acc}"));
    }
    Ok("training accuracy 1.0".into())
}

/// Values reported by [`sgns_factorization`].
#[derive(Debug, Clone, Copy)]
pub struct FactorizationReport {
    pub trained: sgns::FactorizationCheck,
    pub planted: sgns::FactorizationCheck,
    pub random: sgns::FactorizationCheck,
}

/// Trains SGNS on the 50-word synthetic corpus and compares `W·C` with shifted PMI.
pub fn sgns_factorization(
    epochs: usize,
    seed: u64,
) -> std::result::Result<FactorizationReport, String> {
    let corpus = synth::factorization_corpus(seed);
    let vocab = build_vocabulary(&corpus, 1).map_err(e2s)?;
    let k = 5usize;
    let cfg = sgns::SgnsConfig {
        dim: 25,
        negatives: k,
        epochs,
        subsample: 0.0,
        seed,
        ..sgns::SgnsConfig::default()
    };
    let counts = cooc::count_cooccurrences(&corpus, &vocab, cfg.window).map_err(e2s)?;
    let model = sgns::train_sgns(&corpus, &vocab, &cfg).map_err(e2s)?;
    let trained = sgns::check_implicit_factorization(&model, &counts, k as f64, 50).map_err(e2s)?;

    let pmi = association::pmi(&counts, 1.0).map_err(e2s)?;
    let n = vocab.len();
    let mut words = Dense::zeros(n, n);
    let mut contexts = Dense::zeros(n, n);
    for i in 0..n {
        words.set(i, i, 1.0);
        for j in 0..n {
            contexts.set(j, i, pmi.get(i as u32, j as u32) - (k as f64).ln());
        }
    }
    let planted_model = sgns::SgnsModel {
        words,
        contexts,
        config: cfg.clone(),
        vocab_ref: vocab.fingerprint(),
    };
    let planted =
        sgns::check_implicit_factorization(&planted_model, &counts, k as f64, 50).map_err(e2s)?;

    let mut rng = util::rng_for(seed, "selftest-random-vectors");
    let mut random = |r: usize, c: usize| {
        Dense::from_vec(
            r,
            c,
            (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
    };
    let random_model = sgns::SgnsModel {
        words: random(n, cfg.dim),
        contexts: random(n, cfg.dim),
        config: cfg,
        vocab_ref: vocab.fingerprint(),
    };
    let random =
        sgns::check_implicit_factorization(&random_model, &counts, k as f64, 50).map_err(e2s)?;
    Ok(FactorizationReport {
        trained,
        planted,
        random,
    })
}

fn sgns_check(seed: u64) -> CheckResult {
    let r = sgns_factorization(25, seed)?;
    if r.trained.spearman < 0.5 {
        return fail(format!("trained Spearman {:.3} < 0.5", r.trained.spearman));
    }
    if (r.planted.spearman - 1.0).abs() > 1e-9 {
        return fail(format!("planted Spearman {:.6}", r.planted.spearman));
    }
    if r.random.spearman.abs() >= 0.2 {
        return fail(format!("random Spearman {:.3}", r.random.spearman));
    }
    Ok(format!(
        "trained ρ = {:.3} over {} pairs, planted ρ = {:.3}, random ρ = {:.3}",
        r.trained.spearman, r.trained.pairs, r.planted.spearman, r.random.spearman
    ))
}

/// Every suite at full size.
pub fn run_all(seed: u64) -> Vec<Outcome> {
    type Suite = (&'static str, Box<dyn Fn() -> CheckResult>);
    let suites: Vec<Suite> = vec![
        (
            "co-occurrence counting vs double loop",
            Box::new(move || counting(50, seed)),
        ),
        (
            "association formulas vs recomputation",
            Box::new(move || association_formulas(50, seed, 1e-10)),
        ),
        (
            "SGNS implicit factorization",
            Box::new(move || sgns_check(seed)),
        ),
        (
            "low-frequency reweighting properties",
            Box::new(move || wl_properties(100, seed)),
        ),
        (
            "truncated SVD properties",
            Box::new(move || svd_properties(seed)),
        ),
        (
            "LDA planted-topic recovery",
            Box::new(move || lda_recovery(2000, 50, 200, seed)),
        ),
        (
            "KNN vs brute force",
            Box::new(move || knn_oracle(20, 1000, seed)),
        ),
        ("Gaussian NB boundary", Box::new(nb_boundary)),
        (
            "linear SVM on separable blobs",
            Box::new(move || svm_separable(seed)),
        ),
    ];
    suites
        .into_iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let result = f();
            Outcome {
                name,
                result,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        counting(10, 1).unwrap();
        association_formulas(10, 1, 1e-10).unwrap();
        wl_properties(20, 1).unwrap();
        svd_properties(1).unwrap();
        knn_oracle(5, 200, 1).unwrap();
        nb_boundary().unwrap();
        svm_separable(1).unwrap();
        lda_recovery(200, 30, 50, 1).unwrap();
    }
}
