//! Sparse row storage and a banded LU factorization with partial pivoting.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix from `(column, value)` rows.
    pub fn from_rows<R>(n: usize, rows: impl IntoIterator<Item = R>) -> Self
    where
        R: IntoIterator<Item = (usize, f64)>,
    {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        assert_eq!(row_ptr.len(), n + 1, "expected {n} rows");
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// Lower and upper bandwidth.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    /// `self + diag(shift)`.
    pub fn add_diagonal(&self, shift: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for (i, s) in shift.iter().enumerate() {
            let r = out.row_ptr[i]..out.row_ptr[i + 1];
            let pos = out.cols[r.clone()].iter().position(|&c| c == i);
            match pos {
                Some(p) => out.vals[r.start + p] += s,
                None => panic!("row {i} has no stored diagonal"),
            }
        }
        out
    }
}

/// `LU = PA` for a banded matrix, stored row-wise with room for the fill-in
/// that row interchanges create (`kl` extra super-diagonals).
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn idx(&self, i: usize, c: usize) -> usize {
        // column c of row i sits at offset c + kl − i
        i * self.width + c + self.kl - i
    }

    pub fn factor(matrix: &CsrMatrix) -> Result<Self> {
        let n = matrix.n();
        let (kl, ku) = matrix.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu {
            n,
            kl,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
        };
        for i in 0..n {
            for (c, v) in matrix.row(i) {
                let k = lu.idx(i, c);
                lu.data[k] += v;
            }
        }
        let scale = lu.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.data[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 1e-14 * scale) {
                return Err(Error::Linear(format!("matrix is singular at column {k}")));
            }
            lu.pivots[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (lu.idx(k, c), lu.idx(p, c));
                    lu.data.swap(a, b);
                }
            }
            let pivot = lu.data[lu.idx(k, k)];
            let krow = lu.idx(k, k);
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                let l = lu.data[ik] / pivot;
                lu.data[ik] = l;
                if l == 0.0 {
                    continue;
                }
                let irow = lu.idx(i, k);
                for off in 1..=last_col - k {
                    lu.data[irow + off] -= l * lu.data[krow + off];
                }
            }
        }
        Ok(lu)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.data[self.idx(i, k)] * bk;
                }
            }
        }
        let reach = self.width - self.kl - 1;
        for k in (0..n).rev() {
            let base = self.idx(k, k);
            let mut s = b[k];
            for off in 1..=reach.min(n - 1 - k) {
                s -= self.data[base + off] * b[k + off];
            }
            b[k] = s / self.data[base];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
