//! Compressed sparse row matrices and MatrixMarket coordinate I/O.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::util;

/// Row-major sparse matrix; column indices within a row are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn empty(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from per-row `(col, value)` lists. Rows are sorted; duplicate columns are an error.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        let n_rows = rows.len();
        let mut indptr = Vec::with_capacity(n_rows + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable_by_key(|&(c, _)| c);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::invalid(format!("duplicate entry ({r}, {})", w[0].0)));
                }
            }
            for (c, v) in row {
                if c as usize >= n_cols {
                    return Err(Error::invalid(format!("column {c} out of range {n_cols}")));
                }
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let rows = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c as u32, *v))
                    .collect()
            })
            .collect();
        Self::from_rows(n_cols, rows).expect("dense rows are well formed")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        let (idx, val) = self.row(r);
        idx.iter().copied().zip(val.iter().copied())
    }

    pub fn get(&self, r: usize, c: u32) -> Option<f64> {
        let (idx, val) = self.row(r);
        idx.binary_search(&c).ok().map(|i| val[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row_entries(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, c, v) in self.iter() {
            out[r][c as usize] = v;
        }
        out
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `self · x` where `x` is column-major `n_cols × k`; result column-major `n_rows × k`.
    pub fn mul_dense(&self, x: &[f64], k: usize) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols * k);
        let rows: Vec<Vec<f64>> = (0..self.n_rows)
            .into_par_iter()
            .map(|r| {
                let mut acc = vec![0.0; k];
                for (c, v) in self.row_entries(r) {
                    for (j, a) in acc.iter_mut().enumerate() {
                        *a += v * x[j * self.n_cols + c as usize];
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![0.0; self.n_rows * k];
        for (r, acc) in rows.into_iter().enumerate() {
            for (j, a) in acc.into_iter().enumerate() {
                out[j * self.n_rows + r] = a;
            }
        }
        out
    }

    /// `selfᵀ · y` where `y` is column-major `n_rows × k`; result column-major `n_cols × k`.
    pub fn tmul_dense(&self, y: &[f64], k: usize) -> Vec<f64> {
        assert_eq!(y.len(), self.n_rows * k);
        // one accumulator per output column, each scanned over all rows
        let cols: Vec<Vec<f64>> = (0..k)
            .into_par_iter()
            .map(|j| {
                let yj = &y[j * self.n_rows..(j + 1) * self.n_rows];
                let mut acc = vec![0.0; self.n_cols];
                for (r, &yr) in yj.iter().enumerate() {
                    if yr == 0.0 {
                        continue;
                    }
                    for (c, v) in self.row_entries(r) {
                        acc[c as usize] += v * yr;
                    }
                }
                acc
            })
            .collect();
        cols.concat()
    }
}

/// Writes a real-valued matrix in MatrixMarket coordinate format.
///
/// `comments` become `%` lines after the banner; indices are 1-based.
pub fn write_matrix_market(
    m: &CsrMatrix,
    field: MmField,
    comments: &[String],
    path: &Path,
) -> Result<()> {
    let mut s = String::with_capacity(m.nnz() * 24 + 128);
    let field_name = match field {
        MmField::Integer => "integer",
        MmField::Real => "real",
    };
    writeln!(s, "%%MatrixMarket matrix coordinate {field_name} general").unwrap();
    for c in comments {
        writeln!(s, "% {c}").unwrap();
    }
    writeln!(s, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz()).unwrap();
    for (r, c, v) in m.iter() {
        match field {
            MmField::Integer => writeln!(s, "{} {} {}", r + 1, c + 1, v as u64).unwrap(),
            MmField::Real => writeln!(s, "{} {} {}", r + 1, c + 1, util::fmt_f64(v)).unwrap(),
        }
    }
    util::write_atomic(path, s.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmField {
    Integer,
    Real,
}

/// Reads a MatrixMarket coordinate file, returning the matrix and its `%` comment lines.
pub fn read_matrix_market(path: &Path) -> Result<(CsrMatrix, Vec<String>)> {
    let text = util::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    if !banner.starts_with("%%MatrixMarket matrix coordinate") {
        return Err(Error::parse(path, 1, "not a MatrixMarket coordinate file"));
    }
    let mut comments = Vec::new();
    let mut size_line = None;
    for (i, line) in lines.by_ref() {
        if let Some(c) = line.strip_prefix('%') {
            comments.push(c.trim().to_string());
        } else if !line.trim().is_empty() {
            size_line = Some((i + 1, line));
            break;
        }
    }
    let (size_no, size_line) =
        size_line.ok_or_else(|| Error::parse(path, 1, "missing size line"))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::parse(path, size_no, "bad size line"))
        })
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(Error::parse(path, size_no, "size line needs rows cols nnz"));
    }
    let (n_rows, n_cols, nnz) = (dims[0], dims[1], dims[2]);
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_rows];
    let mut seen = 0;
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(r), Some(c), Some(v)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(path, line_no, "expected row col value"));
        };
        let r: usize = r
            .parse()
            .map_err(|_| Error::parse(path, line_no, "bad row"))?;
        let c: usize = c
            .parse()
            .map_err(|_| Error::parse(path, line_no, "bad col"))?;
        if r == 0 || c == 0 || r > n_rows || c > n_cols {
            return Err(Error::parse(path, line_no, "index out of range"));
        }
        let v = util::parse_f64(v, path, line_no)?;
        rows[r - 1].push(((c - 1) as u32, v));
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::parse(
            path,
            size_no,
            format!("declared {nnz} entries, found {seen}"),
        ));
    }
    Ok((CsrMatrix::from_rows(n_cols, rows)?, comments))
}

/// Parses `key=value` pairs from a comment line.
pub fn parse_kv(comment: &str) -> Vec<(String, String)> {
    comment
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_mul(a: &[Vec<f64>], x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let k = x[0].len();
        a.iter()
            .map(|row| {
                (0..k)
                    .map(|j| row.iter().zip(x).map(|(v, xr)| v * xr[j]).sum())
                    .collect()
            })
            .collect()
    }

    proptest! {
        #[test]
        fn products_match_dense(
            a in prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], 4), 3),
            x in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 2), 4),
        ) {
            let m = CsrMatrix::from_dense(&a);
            let xc: Vec<f64> = (0..2).flat_map(|j| x.iter().map(move |r| r[j])).collect();
            let y = m.mul_dense(&xc, 2);
            let want = naive_mul(&a, &x);
            for r in 0..3 {
                for j in 0..2 {
                    prop_assert!((y[j * 3 + r] - want[r][j]).abs() < 1e-12);
                }
            }
            // Aᵀ·(A·x) against the dense transpose
            let at: Vec<Vec<f64>> = (0..4).map(|c| a.iter().map(|r| r[c]).collect()).collect();
            let yd: Vec<Vec<f64>> = want.clone();
            let z = m.tmul_dense(&y, 2);
            let want_z = naive_mul(&at, &yd);
            for c in 0..4 {
                for j in 0..2 {
                    prop_assert!((z[j * 4 + c] - want_z[c][j]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn matrix_market_round_trip(
            a in prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), -1e3..1e3f64], 5), 1..6),
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.mtx");
            let m = CsrMatrix::from_dense(&a);
            write_matrix_market(&m, MmField::Real, &["kind=test".into()], &path).unwrap();
            let (back, comments) = read_matrix_market(&path).unwrap();
            prop_assert_eq!(back, m);
            prop_assert_eq!(comments, vec!["kind=test".to_string()]);
        }
    }

    #[test]
    fn duplicate_entries_rejected() {
        assert!(CsrMatrix::from_rows(3, vec![vec![(1, 1.0), (1, 2.0)]]).is_err());
        assert!(CsrMatrix::from_rows(1, vec![vec![(1, 1.0)]]).is_err());
    }

    #[test]
    fn nnz_mismatch_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
        )
        .unwrap();
        assert!(matches!(
            read_matrix_market(&path),
            Err(Error::Parse { .. })
        ));
    }
}
