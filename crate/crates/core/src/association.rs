//! PMI, PPMI and shifted PPMI from co-occurrence counts.
//!
//! All logarithms are natural. Context smoothing replaces `#(c)/|D|` with
//! `#(c)^α / Σ #(c')^α`; the shift subtracts `shift_exponent · ln k`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooc::CoocCounts;
use crate::error::{Error, Result};
use crate::sparse::{self, CsrMatrix, MmField};
use crate::util;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssociationKind {
    Pmi,
    Ppmi,
    Sppmi,
    /// SPPMI with low-frequency rows reweighted.
    WlSppmi,
}

impl fmt::Display for AssociationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssociationKind::Pmi => "PMI",
            AssociationKind::Ppmi => "PPMI",
            AssociationKind::Sppmi => "SPPMI",
            AssociationKind::WlSppmi => "WLSPPMI",
        })
    }
}

impl FromStr for AssociationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "PMI" => Ok(AssociationKind::Pmi),
            "PPMI" => Ok(AssociationKind::Ppmi),
            "SPPMI" => Ok(AssociationKind::Sppmi),
            "WLSPPMI" => Ok(AssociationKind::WlSppmi),
            other => Err(Error::invalid(format!(
                "unknown association kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationParams {
    pub kind: AssociationKind,
    pub k: f64,
    pub alpha: f64,
    pub shift_exponent: f64,
}

impl AssociationParams {
    fn header(&self) -> String {
        format!(
            "kind={} k={} alpha={} shift_exponent={} log=e",
            self.kind,
            util::fmt_f64(self.k),
            util::fmt_f64(self.alpha),
            util::fmt_f64(self.shift_exponent)
        )
    }
}

/// Sparse word × context association values. For PPMI-family kinds every stored value is > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrix {
    pub rows: CsrMatrix,
    pub params: AssociationParams,
    pub vocab_ref: String,
}

impl AssociationMatrix {
    pub fn get(&self, w: u32, c: u32) -> f64 {
        self.rows.get(w as usize, c).unwrap_or(0.0)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let header = format!("{} vocab_ref={}", self.params.header(), self.vocab_ref);
        sparse::write_matrix_market(&self.rows, MmField::Real, &[header], path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let (rows, comments) = sparse::read_matrix_market(path)?;
        let mut kind = None;
        let (mut k, mut alpha, mut shift_exponent) = (1.0, 1.0, 1.0);
        let mut vocab_ref = String::new();
        for c in &comments {
            for (key, v) in sparse::parse_kv(c) {
                let num = || util::parse_f64(&v, path, 2);
                match key.as_str() {
                    "kind" => kind = Some(v.parse::<AssociationKind>()?),
                    "k" => k = num()?,
                    "alpha" => alpha = num()?,
                    "shift_exponent" => shift_exponent = num()?,
                    "vocab_ref" => vocab_ref = v.clone(),
                    _ => {}
                }
            }
        }
        let kind = kind.ok_or_else(|| Error::parse(path, 2, "missing kind in header"))?;
        Ok(AssociationMatrix {
            rows,
            params: AssociationParams {
                kind,
                k,
                alpha,
                shift_exponent,
            },
            vocab_ref,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "context smoothing exponent {alpha} outside (0, 1]"
        )))
    }
}

/// Applies `f` to the PMI value of every observed pair; `None` drops the cell.
fn transform(
    counts: &CoocCounts,
    alpha: f64,
    f: impl Fn(f64) -> Option<f64> + Sync,
) -> Result<CsrMatrix> {
    check_alpha(alpha)?;
    let ctx_pow: Vec<f64> = counts
        .ctx_marginal
        .iter()
        .map(|&c| (c as f64).powf(alpha))
        .collect();
    let z: f64 = if alpha == 1.0 {
        counts.total_pairs as f64
    } else {
        ctx_pow.iter().sum()
    };
    let m = &counts.counts;
    let rows: Vec<Vec<(u32, f64)>> = (0..m.n_rows())
        .into_par_iter()
        .map(|w| {
            let wm = counts.word_marginal[w] as f64;
            m.row_entries(w)
                .filter_map(|(c, n)| {
                    let pmi = (n * z / (wm * ctx_pow[c as usize])).ln();
                    f(pmi).map(|v| (c, v))
                })
                .collect()
        })
        .collect();
    CsrMatrix::from_rows(m.n_cols(), rows)
}

pub fn pmi(counts: &CoocCounts, alpha: f64) -> Result<AssociationMatrix> {
    let rows = transform(counts, alpha, Some)?;
    Ok(AssociationMatrix {
        rows,
        params: AssociationParams {
            kind: AssociationKind::Pmi,
            k: 1.0,
            alpha,
            shift_exponent: 1.0,
        },
        vocab_ref: counts.vocab_ref.clone(),
    })
}

pub fn ppmi(counts: &CoocCounts, alpha: f64) -> Result<AssociationMatrix> {
    let rows = transform(counts, alpha, |v| (v > 0.0).then_some(v))?;
    Ok(AssociationMatrix {
        rows,
        params: AssociationParams {
            kind: AssociationKind::Ppmi,
            k: 1.0,
            alpha,
            shift_exponent: 1.0,
        },
        vocab_ref: counts.vocab_ref.clone(),
    })
}

/// `max(PMI − shift_exponent · ln k, 0)`, zeros dropped.
pub fn sppmi(
    counts: &CoocCounts,
    k: f64,
    alpha: f64,
    shift_exponent: f64,
) -> Result<AssociationMatrix> {
    if !(k >= 1.0) {
        return Err(Error::invalid(format!("shift k = {k} must be ≥ 1")));
    }
    if !(shift_exponent > 0.0 && shift_exponent <= 1.0) {
        return Err(Error::invalid(format!(
            "shift exponent {shift_exponent} outside (0, 1]"
        )));
    }
    let shift = shift_exponent * k.ln();
    let rows = transform(counts, alpha, |v| {
        let s = v - shift;
        (s > 0.0).then_some(s)
    })?;
    Ok(AssociationMatrix {
        rows,
        params: AssociationParams {
            kind: AssociationKind::Sppmi,
            k,
            alpha,
            shift_exponent,
        },
        vocab_ref: counts.vocab_ref.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts matrix with explicit marginals; |D| = sum of the cells.
    fn toy(cells: &[(u32, u32, u64)], n: usize) -> CoocCounts {
        let mut rows = vec![Vec::new(); n];
        let mut wm = vec![0; n];
        let mut cm = vec![0; n];
        for &(w, c, v) in cells {
            rows[w as usize].push((c, v as f64));
            wm[w as usize] += v;
            cm[c as usize] += v;
        }
        CoocCounts {
            counts: CsrMatrix::from_rows(n, rows).unwrap(),
            total_pairs: wm.iter().sum(),
            word_marginal: wm,
            ctx_marginal: cm,
            window: 1,
            vocab_ref: "toy".into(),
        }
    }

    // #(0,1)=2, #(0)=4, #(1)=2, |D|=8
    fn ln2_case() -> CoocCounts {
        toy(&[(0, 1, 2), (0, 2, 2), (1, 3, 1), (2, 3, 1), (3, 0, 2)], 4)
    }

    #[test]
    fn pmi_direct_value() {
        let c = ln2_case();
        assert_eq!(c.total_pairs, 8);
        assert_eq!(c.word_marginal[0], 4);
        assert_eq!(c.ctx_marginal[1], 2);
        let m = pmi(&c, 1.0).unwrap();
        assert!((m.get(0, 1) - 2f64.ln()).abs() < 1e-15);
        #[allow(clippy::approx_constant)]
        let frozen = 0.6931;
        assert!((m.get(0, 1) - frozen).abs() < 1e-4);
    }

    #[test]
    fn independence_gives_zero() {
        // 2x2 table with uniform counts is exactly independent
        let c = toy(&[(0, 0, 3), (0, 1, 3), (1, 0, 3), (1, 1, 3)], 2);
        let m = pmi(&c, 1.0).unwrap();
        for (_, _, v) in m.rows.iter() {
            assert!(v.abs() < 1e-15);
        }
        assert_eq!(ppmi(&c, 1.0).unwrap().rows.nnz(), 0);
    }

    #[test]
    fn ppmi_clamps_negative() {
        // (0,0) is under-represented relative to independence
        let c = toy(&[(0, 0, 1), (0, 1, 5), (1, 0, 5), (1, 1, 1)], 2);
        let p = pmi(&c, 1.0).unwrap();
        assert!(p.get(0, 0) < 0.0);
        let pp = ppmi(&c, 1.0).unwrap();
        assert_eq!(pp.rows.get(0, 0), None);
        assert_eq!(pp.get(0, 1), p.get(0, 1));
    }

    #[test]
    fn sppmi_shift_cancels_ln2() {
        let c = ln2_case();
        let s = sppmi(&c, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(s.rows.get(0, 1), None);
    }

    #[test]
    fn three_quarter_shift_value() {
        let v: f64 = 2.0 - 0.75 * 5f64.ln();
        assert!((v - 0.7929).abs() < 1e-4);
        // build a cell with PMI exactly ln(e²) is awkward; check the shift arithmetic through sppmi
        let c = ln2_case();
        let s = sppmi(&c, 5.0, 1.0, 0.75).unwrap();
        let p = pmi(&c, 1.0).unwrap();
        for (w, col, val) in s.rows.iter() {
            let want = p.get(w as u32, col) - 0.75 * 5f64.ln();
            assert!((val - want).abs() < 1e-12);
        }
    }

    #[test]
    fn k_one_equals_ppmi() {
        let c = toy(
            &[
                (0, 0, 1),
                (0, 1, 5),
                (1, 0, 5),
                (1, 1, 1),
                (1, 2, 4),
                (2, 1, 4),
            ],
            3,
        );
        for alpha in [1.0, 0.75, 0.5] {
            let a = sppmi(&c, 1.0, alpha, 1.0).unwrap();
            let b = ppmi(&c, alpha).unwrap();
            assert_eq!(a.rows, b.rows);
        }
    }

    #[test]
    fn bad_parameters() {
        let c = ln2_case();
        assert!(pmi(&c, 0.0).is_err());
        assert!(pmi(&c, 1.5).is_err());
        assert!(sppmi(&c, 0.5, 1.0, 1.0).is_err());
        assert!(sppmi(&c, 5.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        let m = sppmi(&ln2_case(), 1.5, 0.75, 0.75).unwrap();
        m.write(&path).unwrap();
        assert_eq!(AssociationMatrix::read(&path).unwrap(), m);
    }
}
