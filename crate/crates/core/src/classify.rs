//! Gaussian naive Bayes, k-nearest neighbours and a linear one-vs-rest SVM on
//! dense document vectors, plus accuracy and per-class evaluation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::factorize::DocVectors;
use crate::util;

pub const NB_VARIANCE_FLOOR: f64 = 1e-9;
pub const DEFAULT_KNN_K: usize = 10;
pub const DEFAULT_SVM_LAMBDA: f64 = 1e-4;
pub const DEFAULT_SVM_EPOCHS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClassifierKind {
    Nb,
    Knn,
    Svm,
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Nb => "NB",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Svm => "SVM",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NB" | "BAYES" => Ok(ClassifierKind::Nb),
            "KNN" => Ok(ClassifierKind::Knn),
            "SVM" => Ok(ClassifierKind::Svm),
            other => Err(Error::invalid(format!("unknown classifier {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cosine,
    Euclidean,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" => Ok(Metric::Cosine),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

/// Hyperparameters for all three classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub knn_k: usize,
    pub knn_metric: Metric,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            knn_k: DEFAULT_KNN_K,
            knn_metric: Metric::Cosine,
            svm_lambda: DEFAULT_SVM_LAMBDA,
            svm_epochs: DEFAULT_SVM_EPOCHS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Nb {
        /// classes × d
        means: Dense,
        /// classes × d, floor included
        variances: Dense,
        log_priors: Vec<f64>,
    },
    Knn {
        x: Dense,
        y: Vec<usize>,
        k: usize,
        metric: Metric,
    },
    Svm {
        /// classes × d, in standardized feature space
        weights: Dense,
        bias: Vec<f64>,
        mean: Vec<f64>,
        scale: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub kind: ClassifierKind,
    pub classes: Vec<String>,
    pub dim: usize,
    pub model: Model,
}

/// Sorted class list and per-row class indices.
pub fn encode_labels(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    let y = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label present"))
        .collect();
    (classes, y)
}

fn check_training(x: &DocVectors) -> Result<(Vec<String>, Vec<usize>)> {
    if x.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    if x.labels.len() != x.len() {
        return Err(Error::invalid("labels do not match feature rows"));
    }
    if !x.matrix.is_finite() {
        return Err(Error::invalid("training features contain NaN or infinity"));
    }
    Ok(encode_labels(&x.labels))
}

fn require_two_classes(classes: &[String]) -> Result<()> {
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least two classes, got {}",
            classes.len()
        )));
    }
    Ok(())
}

/// Index of the largest score; exact ties go to the smaller index.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn train_nb(x: &DocVectors) -> Result<TrainedClassifier> {
    let (classes, y) = check_training(x)?;
    require_two_classes(&classes)?;
    let (c, d) = (classes.len(), x.dim());
    let mut counts = vec![0usize; c];
    let mut means = Dense::zeros(c, d);
    for (row, &k) in x.matrix.rows().zip(&y) {
        counts[k] += 1;
        for (m, v) in means.row_mut(k).iter_mut().zip(row) {
            *m += v;
        }
    }
    for k in 0..c {
        let n = counts[k] as f64;
        means.row_mut(k).iter_mut().for_each(|m| *m /= n);
    }
    let mut variances = Dense::zeros(c, d);
    for (row, &k) in x.matrix.rows().zip(&y) {
        let mu = means.row(k).to_vec();
        for ((s, v), m) in variances.row_mut(k).iter_mut().zip(row).zip(&mu) {
            *s += (v - m) * (v - m);
        }
    }
    for k in 0..c {
        let n = counts[k] as f64;
        variances
            .row_mut(k)
            .iter_mut()
            .for_each(|s| *s = *s / n + NB_VARIANCE_FLOOR);
    }
    let total = x.len() as f64;
    Ok(TrainedClassifier {
        kind: ClassifierKind::Nb,
        dim: d,
        model: Model::Nb {
            means,
            variances,
            log_priors: counts.iter().map(|&n| (n as f64 / total).ln()).collect(),
        },
        classes,
    })
}

fn nb_scores(means: &Dense, variances: &Dense, log_priors: &[f64], q: &[f64]) -> Vec<f64> {
    (0..means.n_rows())
        .map(|k| {
            let ll: f64 = means
                .row(k)
                .iter()
                .zip(variances.row(k))
                .zip(q)
                .map(|((m, v), x)| {
                    -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m) * (x - m) / (2.0 * v)
                })
                .sum();
            log_priors[k] + ll
        })
        .collect()
}

fn distance(metric: Metric, a: &[f64], na: f64, b: &[f64], nb: f64) -> f64 {
    match metric {
        Metric::Cosine => {
            if na == 0.0 || nb == 0.0 {
                1.0
            } else {
                1.0 - util::dot(a, b) / (na * nb)
            }
        }
        Metric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
    }
}

/// Majority vote among the `k` nearest training rows of each query. Distance ties
/// favour the lower training index and vote ties the smaller class index.
pub fn predict_knn(
    train_x: &Dense,
    train_y: &[usize],
    query_x: &Dense,
    k: usize,
    metric: Metric,
) -> Result<Vec<usize>> {
    if train_x.n_rows() == 0 {
        return Err(Error::invalid("empty training set"));
    }
    if k < 1 || k > train_x.n_rows() {
        return Err(Error::invalid(format!(
            "k = {k} must be in 1..={}",
            train_x.n_rows()
        )));
    }
    if train_x.n_cols() != query_x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: train_x.n_cols(),
            actual: query_x.n_cols(),
        });
    }
    let n_classes = train_y.iter().copied().max().unwrap_or(0) + 1;
    let norms: Vec<f64> = train_x.rows().map(util::norm).collect();
    let queries: Vec<&[f64]> = query_x.rows().collect();
    Ok(queries
        .par_iter()
        .map(|q| {
            let qn = util::norm(q);
            let mut dist: Vec<(f64, usize)> = train_x
                .rows()
                .zip(&norms)
                .enumerate()
                .map(|(i, (r, &rn))| (distance(metric, q, qn, r, rn), i))
                .collect();
            if k < dist.len() {
                dist.select_nth_unstable_by(k - 1, neighbour_order);
            }
            let mut votes = vec![0usize; n_classes];
            for &(_, i) in &dist[..k] {
                votes[train_y[i]] += 1;
            }
            let mut best = 0;
            for (c, &v) in votes.iter().enumerate() {
                if v > votes[best] {
                    best = c;
                }
            }
            best
        })
        .collect())
}

pub fn train_knn(x: &DocVectors, k: usize, metric: Metric) -> Result<TrainedClassifier> {
    let (classes, y) = check_training(x)?;
    if k < 1 || k > x.len() {
        return Err(Error::invalid(format!(
            "k = {k} must be in 1..={}",
            x.len()
        )));
    }
    Ok(TrainedClassifier {
        kind: ClassifierKind::Knn,
        dim: x.dim(),
        model: Model::Knn {
            x: x.matrix.clone(),
            y,
            k,
            metric,
        },
        classes,
    })
}

/// One-vs-rest linear SVM by regularized hinge-loss subgradient descent.
///
/// Features are standardized with training statistics. The step size follows
/// `η_t = 1/(λ(t + t₀))`, with `t₀` chosen so the first step is at most 0.1, and
/// training visits the rows in a fresh seeded order every epoch.
pub fn train_svm(
    x: &DocVectors,
    epochs: usize,
    lambda: f64,
    seed: u64,
) -> Result<TrainedClassifier> {
    let (classes, y) = check_training(x)?;
    require_two_classes(&classes)?;
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("λ = {lambda} must be positive")));
    }
    let (n, d) = (x.len(), x.dim());
    let mut mean = vec![0.0; d];
    for row in x.matrix.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut scale = vec![0.0; d];
    for row in x.matrix.rows() {
        for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in scale.iter_mut() {
        let sd = (*s / n as f64).sqrt();
        *s = if sd > 1e-12 { 1.0 / sd } else { 0.0 };
    }
    let z: Vec<Vec<f64>> = x
        .matrix
        .rows()
        .map(|r| {
            r.iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((v, m), s)| (v - m) * s)
                .collect()
        })
        .collect();
    let orders: Vec<Vec<usize>> = (0..epochs)
        .map(|e| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut util::rng_for(seed, &format!("svm-epoch-{e}")));
            order
        })
        .collect();
    let t0 = (1.0 / (0.1 * lambda)).max(1.0);
    let trained: Vec<(Vec<f64>, f64)> = (0..classes.len())
        .into_par_iter()
        .map(|c| {
            let mut w = vec![0.0; d];
            let mut b = 0.0;
            let mut t = 0.0;
            for order in &orders {
                for &i in order {
                    let eta = 1.0 / (lambda * (t + t0));
                    let target = if y[i] == c { 1.0 } else { -1.0 };
                    let margin = target * (util::dot(&w, &z[i]) + b);
                    let shrink = (1.0 - eta * lambda).max(0.0);
                    w.iter_mut().for_each(|v| *v *= shrink);
                    if margin < 1.0 {
                        for (v, f) in w.iter_mut().zip(&z[i]) {
                            *v += eta * target * f;
                        }
                        b += eta * target;
                    }
                    t += 1.0;
                }
            }
            (w, b)
        })
        .collect();
    let mut weights = Dense::zeros(classes.len(), d);
    let mut bias = Vec::with_capacity(classes.len());
    for (c, (w, b)) in trained.into_iter().enumerate() {
        weights.row_mut(c).copy_from_slice(&w);
        bias.push(b);
    }
    Ok(TrainedClassifier {
        kind: ClassifierKind::Svm,
        dim: d,
        model: Model::Svm {
            weights,
            bias,
            mean,
            scale,
        },
        classes,
    })
}

pub fn train(
    kind: ClassifierKind,
    x: &DocVectors,
    config: &ClassifierConfig,
    seed: u64,
) -> Result<TrainedClassifier> {
    match kind {
        ClassifierKind::Nb => train_nb(x),
        ClassifierKind::Knn => train_knn(x, config.knn_k.min(x.len()), config.knn_metric),
        ClassifierKind::Svm => train_svm(x, config.svm_epochs, config.svm_lambda, seed),
    }
}

impl TrainedClassifier {
    /// Predicted class indices into `self.classes`.
    pub fn predict(&self, x: &Dense) -> Result<Vec<usize>> {
        if x.n_cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.n_cols(),
            });
        }
        let rows: Vec<&[f64]> = x.rows().collect();
        Ok(match &self.model {
            Model::Nb {
                means,
                variances,
                log_priors,
            } => rows
                .par_iter()
                .map(|q| argmax(&nb_scores(means, variances, log_priors, q)))
                .collect(),
            Model::Knn {
                x: tx,
                y,
                k,
                metric,
            } => predict_knn(tx, y, x, *k, *metric)?,
            Model::Svm {
                weights,
                bias,
                mean,
                scale,
            } => rows
                .par_iter()
                .map(|q| {
                    let z: Vec<f64> = q
                        .iter()
                        .zip(mean)
                        .zip(scale)
                        .map(|((v, m), s)| (v - m) * s)
                        .collect();
                    let scores: Vec<f64> = weights
                        .rows()
                        .zip(bias)
                        .map(|(w, b)| util::dot(w, &z) + b)
                        .collect();
                    argmax(&scores)
                })
                .collect(),
        })
    }
}

/// Identifies one experiment cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct RunMeta {
    pub dataset: String,
    pub model: String,
    pub dim: usize,
    pub classifier: String,
    /// Number of categories in the subset.
    pub categories: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub classes: Vec<String>,
    /// `confusion[true][predicted]`; test labels unseen in training get extra rows and no column.
    pub confusion: Vec<Vec<usize>>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub meta: RunMeta,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }
}

/// Evaluates on labelled test vectors. Test labels absent from training count as errors.
pub fn evaluate(model: &TrainedClassifier, test: &DocVectors, meta: RunMeta) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    let pred = model.predict(&test.matrix)?;
    let c = model.classes.len();
    let mut classes = model.classes.clone();
    for l in &test.labels {
        if !classes.contains(l) {
            log::warn!("test label {l:?} never seen in training");
            classes.push(l.clone());
        }
    }
    let mut confusion = vec![vec![0usize; c]; classes.len()];
    for (label, &p) in test.labels.iter().zip(&pred) {
        let t = classes
            .iter()
            .position(|x| x == label)
            .expect("label registered");
        confusion[t][p] += 1;
    }
    let correct: usize = (0..c).map(|i| confusion[i][i]).sum();
    let precision = (0..c)
        .map(|j| {
            let col: usize = confusion.iter().map(|r| r[j]).sum();
            if col == 0 {
                0.0
            } else {
                confusion[j][j] as f64 / col as f64
            }
        })
        .collect();
    let recall = (0..c)
        .map(|i| {
            let row: usize = confusion[i].iter().sum();
            if row == 0 {
                0.0
            } else {
                confusion[i][i] as f64 / row as f64
            }
        })
        .collect();
    Ok(EvalReport {
        accuracy: correct as f64 / test.len() as f64,
        classes,
        confusion,
        precision,
        recall,
        meta,
    })
}

/// Orders by distance then training index; shared with the brute-force oracle.
pub fn neighbour_order(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vectors(rows: &[Vec<f64>], labels: &[&str]) -> DocVectors {
        DocVectors {
            matrix: Dense::from_rows(rows),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            skipped: 0,
        }
    }

    fn blobs(n: usize, margin: f64, seed: u64) -> DocVectors {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let side = if i % 2 == 0 { 1.0 } else { -1.0 };
            let x = side * (margin + rng.random_range(0.0..2.0));
            rows.push(vec![x, rng.random_range(-3.0..3.0)]);
            labels.push(if side > 0.0 { "pos" } else { "neg" });
        }
        vectors(&rows, &labels)
    }

    #[test]
    fn nb_boundary_at_zero() {
        // class a = {−2, 0}, class b = {0, 2}: means ∓1, population variance 1
        let rows: Vec<Vec<f64>> = [-2.0, 0.0, 0.0, 2.0].iter().map(|v| vec![*v]).collect();
        let x = vectors(&rows, &["a", "a", "b", "b"]);
        let m = train_nb(&x).unwrap();
        let Model::Nb {
            means, variances, ..
        } = &m.model
        else {
            unreachable!()
        };
        assert_eq!((means.get(0, 0), means.get(1, 0)), (-1.0, 1.0));
        assert!(
            (variances.get(0, 0) - 1.0).abs() < 1e-8 && variances.get(0, 0) == variances.get(1, 0)
        );
        let q = Dense::from_rows(&[vec![-1e-6], vec![1e-6], vec![-5.0], vec![5.0]]);
        assert_eq!(m.predict(&q).unwrap(), vec![0, 1, 0, 1]);
    }

    #[test]
    fn nb_constant_feature_uses_floor() {
        let x = vectors(
            &[
                vec![1.0, 0.0],
                vec![1.0, 0.1],
                vec![1.0, 5.0],
                vec![1.0, 5.1],
            ],
            &["a", "a", "b", "b"],
        );
        let m = train_nb(&x).unwrap();
        let p = m
            .predict(&Dense::from_rows(&[vec![2.0, 0.0], vec![1.0, 5.0]]))
            .unwrap();
        assert_eq!(p, vec![0, 1]);
        assert_eq!(m.predict(&x.matrix).unwrap(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn nb_requires_two_classes() {
        assert!(train_nb(&vectors(&[vec![1.0]], &["a"])).is_err());
    }

    #[test]
    fn knn_single_point_and_exact_match() {
        let x = Dense::from_rows(&[vec![1.0, 2.0]]);
        let q = Dense::from_rows(&[vec![-3.0, 0.5], vec![0.0, 0.0]]);
        assert_eq!(
            predict_knn(&x, &[4], &q, 1, Metric::Cosine).unwrap(),
            vec![4, 4]
        );
        let x = Dense::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let q = Dense::from_rows(&[vec![0.0, 1.0]]);
        assert_eq!(
            predict_knn(&x, &[0, 1, 2], &q, 1, Metric::Euclidean).unwrap(),
            vec![1]
        );
    }

    #[test]
    fn knn_tie_breaks() {
        // two equidistant points of different classes, k = 1 → lower index wins
        let x = Dense::from_rows(&[vec![1.0], vec![-1.0]]);
        let q = Dense::from_rows(&[vec![0.0]]);
        assert_eq!(
            predict_knn(&x, &[1, 0], &q, 1, Metric::Euclidean).unwrap(),
            vec![1]
        );
        // k = 2 gives one vote each → smaller class index wins
        assert_eq!(
            predict_knn(&x, &[1, 0], &q, 2, Metric::Euclidean).unwrap(),
            vec![0]
        );
        assert!(predict_knn(&x, &[1, 0], &q, 3, Metric::Euclidean).is_err());
    }

    #[test]
    fn knn_matches_brute_force_k7() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Dense::from_vec(
            100,
            4,
            (0..400).map(|_| rng.random_range(-1.0..1.0)).collect(),
        );
        let y: Vec<usize> = (0..100).map(|_| rng.random_range(0..3)).collect();
        let q = Dense::from_vec(
            30,
            4,
            (0..120).map(|_| rng.random_range(-1.0..1.0)).collect(),
        );
        for metric in [Metric::Cosine, Metric::Euclidean] {
            assert_eq!(
                predict_knn(&x, &y, &q, 7, metric).unwrap(),
                oracle::knn_brute_force(&x, &y, &q, 7, metric)
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn knn_oracle_on_grid_points(
            n in 1usize..80,
            q in 1usize..20,
            d in 1usize..4,
            k_raw in 1usize..15,
            seed in any::<u64>(),
        ) {
            // small integer coordinates force many exact distance ties
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Dense::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-2..3) as f64).collect());
            let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
            let qs = Dense::from_vec(q, d, (0..q * d).map(|_| rng.random_range(-2..3) as f64).collect());
            let k = k_raw.min(n);
            for metric in [Metric::Cosine, Metric::Euclidean] {
                prop_assert_eq!(
                    predict_knn(&x, &y, &qs, k, metric).unwrap(),
                    oracle::knn_brute_force(&x, &y, &qs, k, metric)
                );
            }
        }

        #[test]
        fn nb_scale_equivariance(seed in any::<u64>(), c in 0.01f64..100.0) {
            let data = blobs(40, 0.5, seed);
            let mut scaled = data.clone();
            scaled.matrix = Dense::from_vec(40, 2, data.matrix.as_slice().iter().map(|v| v * c).collect());
            let q = Dense::from_rows(&[vec![0.3, 1.0], vec![-2.0, 0.1], vec![4.0, -2.0]]);
            let qs = Dense::from_vec(3, 2, q.as_slice().iter().map(|v| v * c).collect());
            prop_assert_eq!(
                train_nb(&data).unwrap().predict(&q).unwrap(),
                train_nb(&scaled).unwrap().predict(&qs).unwrap()
            );
        }

        #[test]
        fn nb_permutation_invariance(seed in any::<u64>()) {
            let data = blobs(30, 0.5, seed);
            let mut idx: Vec<usize> = (0..30).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
            let perm = DocVectors {
                matrix: data.matrix.select_rows(&idx),
                labels: idx.iter().map(|&i| data.labels[i].clone()).collect(),
                skipped: 0,
            };
            let (a, b) = (train_nb(&data).unwrap(), train_nb(&perm).unwrap());
            let (Model::Nb { means: m1, variances: v1, log_priors: p1 }, Model::Nb { means: m2, variances: v2, log_priors: p2 }) = (&a.model, &b.model) else { unreachable!() };
            for (x, y) in m1.as_slice().iter().chain(v1.as_slice()).chain(p1).zip(m2.as_slice().iter().chain(v2.as_slice()).chain(p2)) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn svm_separates_margin_one_blobs() {
        let data = blobs(200, 1.0, 3);
        let m = train_svm(&data, 100, DEFAULT_SVM_LAMBDA, 1).unwrap();
        let report = evaluate(&m, &data, RunMeta::default()).unwrap();
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn svm_is_deterministic() {
        let data = blobs(50, 0.2, 4);
        assert_eq!(
            train_svm(&data, 10, 1e-3, 9).unwrap(),
            train_svm(&data, 10, 1e-3, 9).unwrap()
        );
    }

    #[test]
    fn svm_large_lambda_shrinks_weights() {
        let data = blobs(50, 1.0, 5);
        let m = train_svm(&data, 20, 1e6, 1).unwrap();
        let Model::Svm { weights, .. } = &m.model else {
            unreachable!()
        };
        assert!(weights.as_slice().iter().all(|w| w.abs() < 1e-5));
    }

    #[test]
    fn evaluate_counts() {
        let train = vectors(&[vec![0.0], vec![1.0], vec![2.0]], &["a", "b", "b"]);
        let m = train_knn(&train, 3, Metric::Euclidean).unwrap();
        // constant classifier: majority class b everywhere
        let test = vectors(
            &[vec![0.0], vec![5.0], vec![9.0], vec![1.0]],
            &["a", "b", "b", "b"],
        );
        let r = evaluate(&m, &test, RunMeta::default()).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.total(), 4);
        assert_eq!(r.confusion, vec![vec![0, 1], vec![0, 3]]);
        assert_eq!(r.recall, vec![0.0, 1.0]);
        let wrong_dim = vectors(&[vec![0.0, 1.0]], &["a"]);
        assert!(matches!(
            evaluate(&m, &wrong_dim, RunMeta::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn perfect_predictions() {
        let data = blobs(20, 2.0, 1);
        let m = train_nb(&data).unwrap();
        assert_eq!(
            evaluate(&m, &data, RunMeta::default()).unwrap().accuracy,
            1.0
        );
    }

    #[test]
    fn kinds_parse() {
        for k in [ClassifierKind::Nb, ClassifierKind::Knn, ClassifierKind::Svm] {
            assert_eq!(k.to_string().parse::<ClassifierKind>().unwrap(), k);
        }
    }
}
