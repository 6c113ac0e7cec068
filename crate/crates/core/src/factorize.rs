//! Randomized truncated SVD of association matrices, word embeddings read out of
//! the factors, and average-pooled document vectors.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::association::AssociationMatrix;
use crate::corpus::{Document, LabeledCorpus, Vocabulary};
use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::util;

pub const DEFAULT_OVERSAMPLE: usize = 10;
pub const DEFAULT_POWER_ITERS: usize = 2;
pub const DEFAULT_WEIGHTING: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// `V × d`, orthonormal columns (zero columns past the numerical rank).
    pub u: Dense,
    /// Nonincreasing, nonnegative.
    pub sigma: Vec<f64>,
    /// `d × C`, orthonormal rows (zero rows past the numerical rank).
    pub vt: Dense,
    /// Number of nonzero singular values found.
    pub rank: usize,
}

impl Svd {
    /// Dense `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> Dense {
        let (n, m, d) = (self.u.n_rows(), self.vt.n_cols(), self.sigma.len());
        let mut out = Dense::zeros(n, m);
        for i in 0..n {
            let ui = self.u.row(i);
            let row = out.row_mut(i);
            for k in 0..d {
                let s = ui[k] * self.sigma[k];
                if s == 0.0 {
                    continue;
                }
                for (o, v) in row.iter_mut().zip(self.vt.row(k)) {
                    *o += s * v;
                }
            }
        }
        out
    }
}

/// Squared Frobenius norm of `m − U Σ Vᵀ`.
pub fn reconstruction_error_sq(m: &CsrMatrix, svd: &Svd) -> f64 {
    let rec = svd.reconstruct();
    let mut err = 0.0;
    for i in 0..m.n_rows() {
        let mut row = rec.row(i).to_vec();
        for (c, v) in m.row_entries(i) {
            row[c as usize] -= v;
        }
        err += row.iter().map(|x| x * x).sum::<f64>();
    }
    err
}

fn thin_q(cols: usize, rows: usize, col_major: Vec<f64>) -> DMatrix<f64> {
    DMatrix::from_vec(rows, cols, col_major).qr().q()
}

/// Randomized range-finder SVD keeping the top `d` singular triplets.
///
/// The sketch width is `d + oversample`, capped at `min(V, C)`; each power
/// iteration re-orthonormalizes. Each singular vector pair is signed so the
/// largest-magnitude entry of the left vector is positive.
pub fn truncated_svd(
    m: &CsrMatrix,
    d: usize,
    seed: u64,
    oversample: usize,
    power_iters: usize,
) -> Result<Svd> {
    let (n_rows, n_cols) = (m.n_rows(), m.n_cols());
    let max_rank = n_rows.min(n_cols);
    if d < 1 || d > max_rank {
        return Err(Error::invalid(format!(
            "dimension {d} outside 1..={max_rank} for a {n_rows}×{n_cols} matrix"
        )));
    }
    if m.nnz() == 0 {
        return Err(Error::invalid("cannot factorize an empty matrix"));
    }
    let width = (d + oversample).min(max_rank);

    let mut rng = util::rng_for(seed, "svd-sketch");
    let omega: Vec<f64> = (0..n_cols * width)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let mut q = thin_q(width, n_rows, m.mul_dense(&omega, width));
    for _ in 0..power_iters {
        let z = thin_q(width, n_cols, m.tmul_dense(q.as_slice(), width));
        q = thin_q(width, n_rows, m.mul_dense(z.as_slice(), width));
    }
    // Bᵀ = Aᵀ Q is C × width; A ≈ Q B = (Q W) Σ Yᵀ where Bᵀ = Y Σ Wᵀ
    let bt = DMatrix::from_vec(n_cols, width, m.tmul_dense(q.as_slice(), width));
    let svd = bt.svd(true, true);
    let y = svd.u.expect("left vectors requested");
    let wt = svd.v_t.expect("right vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let left = &q * wt.transpose();
    let sigma_max = svd.singular_values[order[0]];
    let tol = sigma_max * (n_rows.max(n_cols) as f64) * f64::EPSILON * 16.0;

    let mut u = Dense::zeros(n_rows, d);
    let mut vt = Dense::zeros(d, n_cols);
    let mut sigma = vec![0.0; d];
    let mut rank = 0;
    for (k, &src) in order.iter().take(d).enumerate() {
        let s = svd.singular_values[src];
        if !(s > tol) {
            continue;
        }
        rank += 1;
        sigma[k] = s;
        let col = left.column(src);
        let (mut best, mut best_abs) = (0.0, -1.0);
        for &v in col.iter() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = v;
            }
        }
        let sign = if best < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n_rows {
            u.set(i, k, sign * col[i]);
        }
        let right = y.column(src);
        for j in 0..n_cols {
            vt.set(k, j, sign * right[j]);
        }
    }
    if rank < d {
        log::warn!(
            "requested {d} components but the matrix has numerical rank {rank}; padding with zeros"
        );
    }
    Ok(Svd { u, sigma, vt, rank })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingSource {
    Svd,
    Sgns,
    LdaPhi,
}

impl fmt::Display for EmbeddingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingSource::Svd => "SVD",
            EmbeddingSource::Sgns => "SGNS",
            EmbeddingSource::LdaPhi => "LDAPhi",
        })
    }
}

/// Dense `V × d` word vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub matrix: Dense,
    pub source: EmbeddingSource,
    /// Singular value exponent for SVD-derived embeddings.
    pub weighting: Option<f64>,
    pub vocab_ref: String,
}

impl EmbeddingMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn vector(&self, id: u32) -> &[f64] {
        self.matrix.row(id as usize)
    }

    /// word2vec text format: `V d` then `word v1 … vd` per line.
    pub fn write_word2vec(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        if vocab.len() != self.matrix.n_rows() {
            return Err(Error::VocabularyMismatch(format!(
                "{} embedding rows for {} words",
                self.matrix.n_rows(),
                vocab.len()
            )));
        }
        let mut s = format!("{} {}\n", self.matrix.n_rows(), self.dim());
        for (w, row) in vocab.words().iter().zip(self.matrix.rows()) {
            s.push_str(w);
            for v in row {
                s.push(' ');
                s.push_str(&util::fmt_f64(*v));
            }
            s.push('\n');
        }
        util::write_atomic(path, s.as_bytes())
    }

    /// Reads word2vec text vectors, reordered to match `vocab`. Every vocabulary word must be present.
    pub fn read_word2vec(path: &Path, vocab: &Vocabulary, source: EmbeddingSource) -> Result<Self> {
        let text = util::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(path, 1, "bad header")))
            .collect::<Result<_>>()?;
        let [n, d] = dims[..] else {
            return Err(Error::parse(path, 1, "header must be `V d`"));
        };
        let mut matrix = Dense::zeros(vocab.len(), d);
        let mut filled = vec![false; vocab.len()];
        let mut seen = 0;
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            seen += 1;
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap();
            let values: Vec<f64> = parts
                .map(|t| util::parse_f64(t, path, line_no))
                .collect::<Result<_>>()?;
            if values.len() != d {
                return Err(Error::parse(path, line_no, format!("expected {d} values")));
            }
            if let Some(id) = vocab.id(word) {
                matrix.row_mut(id as usize).copy_from_slice(&values);
                filled[id as usize] = true;
            }
        }
        if seen != n {
            return Err(Error::parse(
                path,
                1,
                format!("header declares {n} rows, found {seen}"),
            ));
        }
        if let Some(missing) = filled.iter().position(|f| !f) {
            return Err(Error::VocabularyMismatch(format!(
                "word {:?} has no vector in {}",
                vocab.word(missing as u32),
                path.display()
            )));
        }
        Ok(EmbeddingMatrix {
            matrix,
            source,
            weighting: None,
            vocab_ref: vocab.fingerprint(),
        })
    }
}

/// Row `w` becomes `U_w ⊙ Σ^p`.
pub fn word_embeddings(svd: &Svd, p: f64, vocab_ref: &str) -> Result<EmbeddingMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "weighting exponent {p} outside [0, 1]"
        )));
    }
    let scale: Vec<f64> = svd.sigma.iter().map(|s| s.powf(p)).collect();
    let mut matrix = svd.u.clone();
    for i in 0..matrix.n_rows() {
        for (v, s) in matrix.row_mut(i).iter_mut().zip(&scale) {
            *v *= s;
        }
    }
    Ok(EmbeddingMatrix {
        matrix,
        source: EmbeddingSource::Svd,
        weighting: Some(p),
        vocab_ref: vocab_ref.to_string(),
    })
}

/// Factorizes an association matrix and reads out weighted word vectors.
pub fn embed_association(
    m: &AssociationMatrix,
    d: usize,
    p: f64,
    seed: u64,
    oversample: usize,
    power_iters: usize,
) -> Result<EmbeddingMatrix> {
    let svd = truncated_svd(&m.rows, d, seed, oversample, power_iters)?;
    word_embeddings(&svd, p, &m.vocab_ref)
}

fn check_vocab(emb: &EmbeddingMatrix, vocab: &Vocabulary) -> Result<()> {
    if emb.matrix.n_rows() != vocab.len() {
        return Err(Error::VocabularyMismatch(format!(
            "{} embedding rows for {} words",
            emb.matrix.n_rows(),
            vocab.len()
        )));
    }
    Ok(())
}

/// Mean of the embedding rows of the document's in-vocabulary tokens, or `None`
/// when it has none.
pub fn average_pool(
    doc: &Document,
    emb: &EmbeddingMatrix,
    vocab: &Vocabulary,
) -> Result<Option<Vec<f64>>> {
    check_vocab(emb, vocab)?;
    Ok(pool_ids(&vocab.encode(&doc.tokens), emb))
}

fn pool_ids(ids: &[u32], emb: &EmbeddingMatrix) -> Option<Vec<f64>> {
    if ids.is_empty() {
        return None;
    }
    let mut acc = vec![0.0; emb.dim()];
    for &id in ids {
        for (a, v) in acc.iter_mut().zip(emb.vector(id)) {
            *a += v;
        }
    }
    let n = ids.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Some(acc)
}

/// Dense per-document features with aligned labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVectors {
    pub matrix: Dense,
    pub labels: Vec<String>,
    /// Documents with no in-vocabulary token (their rows are zero or uniform).
    pub skipped: usize,
}

impl DocVectors {
    pub fn dim(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn len(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.n_rows() == 0
    }

    /// CSV with a `label` column followed by `f0 … f{d-1}`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["label".to_string()];
        header.extend((0..self.dim()).map(|j| format!("f{j}")));
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for (label, row) in self.labels.iter().zip(self.matrix.rows()) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| util::fmt_f64(*v)));
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        util::write_atomic(path, &bytes)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let mut labels = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let line = i + 2;
            let label = rec
                .get(0)
                .ok_or_else(|| Error::parse(path, line, "missing label"))?;
            let d = rec.len() - 1;
            if *dim.get_or_insert(d) != d {
                return Err(Error::parse(path, line, "ragged feature row"));
            }
            labels.push(label.to_string());
            for v in rec.iter().skip(1) {
                data.push(util::parse_f64(v, path, line)?);
            }
        }
        let dim = dim.unwrap_or(0);
        Ok(DocVectors {
            matrix: Dense::from_vec(labels.len(), dim, data),
            labels,
            skipped: 0,
        })
    }
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::parse(
        path,
        e.position().map_or(0, |p| p.line() as usize),
        e.to_string(),
    )
}

/// Average-pools every document of a corpus, in corpus order.
pub fn corpus_vectors(
    corpus: &LabeledCorpus,
    emb: &EmbeddingMatrix,
    vocab: &Vocabulary,
) -> Result<DocVectors> {
    check_vocab(emb, vocab)?;
    let pooled: Vec<Option<Vec<f64>>> = corpus
        .documents
        .par_iter()
        .map(|doc| pool_ids(&vocab.encode(&doc.tokens), emb))
        .collect();
    let d = emb.dim();
    let mut data = Vec::with_capacity(pooled.len() * d);
    let mut skipped = 0;
    for p in pooled {
        match p {
            Some(v) => data.extend(v),
            None => {
                skipped += 1;
                data.extend(std::iter::repeat_n(0.0, d));
            }
        }
    }
    if skipped > 0 {
        log::info!("{skipped} documents had no in-vocabulary token");
    }
    Ok(DocVectors {
        matrix: Dense::from_vec(corpus.len(), d, data),
        labels: corpus
            .documents
            .iter()
            .map(|doc| doc.label.clone())
            .collect(),
        skipped,
    })
}

impl FromStr for EmbeddingSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svd" => Ok(EmbeddingSource::Svd),
            "sgns" => Ok(EmbeddingSource::Sgns),
            "ldaphi" | "lda" => Ok(EmbeddingSource::LdaPhi),
            other => Err(Error::invalid(format!(
                "unknown embedding source {other:?}"
            ))),
        }
    }
}
