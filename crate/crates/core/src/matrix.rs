//! Symmetric banded storage, a small row-major dense matrix, banded Cholesky,
//! and the plain-text coordinate dump.
//!
//! Dump format: a header line `order <n> symmetric`, then one line
//! `<row> <col> <value>` per stored nonzero with `row >= col` (0-based).

use std::io::{BufRead, Write};

use crate::{Error, Result, Scalar};

/// Symmetric matrix keeping the lower band only, so symmetry is exact by
/// construction. Entry `(i, j)`, `i >= j`, `i - j <= kd`, lives at
/// `data[j * (kd + 1) + (i - j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix<T> {
    n: usize,
    kd: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymmetricMatrix<T> {
    pub fn zeros(n: usize, kd: usize) -> Self {
        let kd = kd.min(n.saturating_sub(1));
        Self {
            n,
            kd,
            data: vec![T::zero(); n * (kd + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_dense_lower(dense: &DenseMatrix<T>) -> Result<Self> {
        if dense.rows() != dense.cols() {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let n = dense.rows();
        let mut kd = 0;
        for i in 0..n {
            for j in 0..i {
                if dense.get(i, j) != T::zero() {
                    kd = kd.max(i - j);
                }
            }
        }
        let mut m = Self::zeros(n, kd);
        for j in 0..n {
            for i in j..(j + kd + 1).min(n) {
                m.set(i, j, dense.get(i, j));
            }
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Half-bandwidth `kd`.
    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (i - j <= self.kd).then(|| j * (self.kd + 1) + (i - j))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of order {}", self.n);
        self.slot(i, j).map_or(T::zero(), |s| self.data[s])
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside half-bandwidth {}", self.kd));
        self.data[s] = v;
    }

    /// Adds `v` to the symmetric pair `(i, j)`/`(j, i)`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside half-bandwidth {}", self.kd));
        self.data[s] += v;
    }

    /// Adds `weight * v vᵀ` for a sparse vector given as `(index, value)` pairs
    /// with distinct indices.
    pub fn add_outer(&mut self, v: &[(usize, T)], weight: T) {
        for &(i, vi) in v {
            for &(j, vj) in v {
                if i >= j {
                    self.add(i, j, weight * vi * vj);
                }
            }
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            n: self.n,
            kd: self.kd,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: T, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "order mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        let kd = self.kd.max(other.kd);
        let mut out = Self::zeros(self.n, kd);
        for j in 0..self.n {
            for i in j..(j + kd + 1).min(self.n) {
                let v = self.get(i, j) + c * other.get(i, j);
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.data[i * (self.kd + 1)]).collect()
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> T {
        let mut s = T::zero();
        for j in 0..self.n {
            for d in 0..=self.kd.min(self.n - 1 - j) {
                let v = self.data[j * (self.kd + 1) + d];
                s += if d == 0 { v * v } else { v * v + v * v };
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::zero(); self.n];
        for j in 0..self.n {
            let col = &self.data[j * (self.kd + 1)..(j + 1) * (self.kd + 1)];
            y[j] += col[0] * x[j];
            for d in 1..=self.kd.min(self.n - 1 - j) {
                let v = col[d];
                y[j + d] += v * x[j];
                y[j] += v * x[j + d];
            }
        }
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(&a, &b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for i in j..(j + self.kd + 1).min(self.n) {
                let v = self.get(i, j);
                d.set(i, j, v);
                d.set(j, i, v);
            }
        }
        d
    }

    /// Kronecker product `a ⊗ b`: composite index `i_a * n_b + i_b`, so `b`
    /// varies fastest.
    pub fn kron(a: &Self, b: &Self) -> Self {
        let nb = b.n;
        let n = a.n * nb;
        let kd = (a.kd * nb + b.kd).min(n.saturating_sub(1));
        let mut out = Self::zeros(n, kd);
        for ia in 0..a.n {
            for ja in ia.saturating_sub(a.kd)..=(ia + a.kd).min(a.n - 1) {
                let va = a.get(ia, ja);
                if va == T::zero() {
                    continue;
                }
                for ib in 0..nb {
                    for jb in ib.saturating_sub(b.kd)..=(ib + b.kd).min(nb - 1) {
                        let (r, c) = (ia * nb + ib, ja * nb + jb);
                        if r >= c {
                            let vb = b.get(ib, jb);
                            out.add(r, c, va * vb);
                        }
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        let kd = self.kd.max(other.kd);
        let mut m = T::zero();
        for j in 0..self.n {
            for i in j..(j + kd + 1).min(self.n) {
                m = m.max((self.get(i, j) - other.get(i, j)).abs());
            }
        }
        m
    }

    /// Banded Cholesky factor `A = L Lᵀ`.
    pub fn cholesky(&self) -> Result<BandedCholesky<T>> {
        BandedCholesky::factor(self)
    }

    pub fn write_coordinate<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "order {} symmetric", self.n)?;
        for j in 0..self.n {
            for i in j..(j + self.kd + 1).min(self.n) {
                let v = self.get(i, j);
                if v != T::zero() {
                    writeln!(w, "{i} {j} {:.16e}", v)?;
                }
            }
        }
        Ok(())
    }

    pub fn read_coordinate<R: BufRead>(r: R) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidData(format!("coordinate dump: {msg}"));
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty input"))?
            .map_err(|e| bad(&e.to_string()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "order" || parts[2] != "symmetric" {
            return Err(bad("expected header `order <n> symmetric`"));
        }
        let n: usize = parts[1].parse().map_err(|_| bad("bad order"))?;
        let mut entries = Vec::new();
        let mut kd = 0;
        for line in lines {
            let line = line.map_err(|e| bad(&e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad("expected `row col value`"));
            }
            let i: usize = f[0].parse().map_err(|_| bad("bad row"))?;
            let j: usize = f[1].parse().map_err(|_| bad("bad col"))?;
            let v: f64 = f[2].parse().map_err(|_| bad("bad value"))?;
            if i >= n || j >= n || i < j {
                return Err(bad("entry outside the lower triangle"));
            }
            kd = kd.max(i - j);
            entries.push((i, j, T::lit(v)));
        }
        let mut m = Self::zeros(n, kd);
        for (i, j, v) in entries {
            m.set(i, j, v);
        }
        Ok(m)
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

/// Lower-triangular banded Cholesky factor, stored by rows:
/// `L[i][i - d]` at `data[i * (kd + 1) + d]`.
#[derive(Debug, Clone)]
pub struct BandedCholesky<T> {
    n: usize,
    kd: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandedCholesky<T> {
    fn factor(a: &SymmetricMatrix<T>) -> Result<Self> {
        let (n, kd) = (a.n, a.kd);
        let w = kd + 1;
        let mut l = vec![T::zero(); n * w];
        for i in 0..n {
            let first = i.saturating_sub(kd);
            for j in first..=i {
                // Σ_k L[i][k] L[j][k], k in [max(first_i, first_j), j)
                let kstart = first.max(j.saturating_sub(kd));
                let mut s = a.get(i, j);
                for k in kstart..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if j == i {
                    if !(s > T::zero()) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite {
                            context: String::new(),
                            row: i,
                            pivot: s.to_f64_lossy(),
                        });
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(Self { n, kd, data: l })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    #[inline]
    fn at(&self, i: usize, d: usize) -> T {
        self.data[i * (self.kd + 1) + d]
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower(&self, b: &mut [T]) {
        for i in 0..self.n {
            let mut s = b[i];
            for d in 1..=self.kd.min(i) {
                s -= self.at(i, d) * b[i - d];
            }
            b[i] = s / self.at(i, 0);
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn solve_upper(&self, y: &mut [T]) {
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for d in 1..=self.kd.min(self.n - 1 - i) {
                s -= self.at(i + d, d) * y[i + d];
            }
            y[i] = s / self.at(i, 0);
        }
    }

    /// Replaces `X` by `L⁻¹ X`, working on whole rows.
    pub fn solve_lower_rows(&self, x: &mut DenseMatrix<T>) {
        assert_eq!(x.rows(), self.n);
        let cols = x.cols();
        let data = x.as_mut_slice();
        for i in 0..self.n {
            let (done, rest) = data.split_at_mut(i * cols);
            let row = &mut rest[..cols];
            for d in 1..=self.kd.min(i) {
                let c = self.at(i, d);
                if c == T::zero() {
                    continue;
                }
                let prev = &done[(i - d) * cols..(i - d + 1) * cols];
                for (r, &p) in row.iter_mut().zip(prev) {
                    *r -= c * p;
                }
            }
            let inv = T::one() / self.at(i, 0);
            for r in row.iter_mut() {
                *r *= inv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tridiag(n: usize) -> SymmetricMatrix<f64> {
        let mut m = SymmetricMatrix::zeros(n, 1);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i > 0 {
                m.set(i, i - 1, -1.0);
            }
        }
        m
    }

    #[test]
    fn band_access_is_symmetric() {
        let m = tridiag(4);
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(0, 3), 0.0);
        assert_eq!(m.trace(), 8.0);
        assert_abs_diff_eq!(m.frobenius_norm(), (4.0f64 * 4.0 + 6.0).sqrt());
    }

    #[test]
    fn matvec_matches_dense() {
        let m = tridiag(5);
        let d = m.to_dense();
        let x = [1.0, -2.0, 0.5, 3.0, 1.5];
        let y = m.matvec(&x);
        for i in 0..5 {
            let e: f64 = (0..5).map(|j| d.get(i, j) * x[j]).sum();
            assert_abs_diff_eq!(y[i], e, epsilon = 1e-15);
        }
    }

    #[test]
    fn cholesky_solves() {
        let m = tridiag(6);
        let l = m.cholesky().unwrap();
        let b = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut x = b.clone();
        l.solve_lower(&mut x);
        l.solve_upper(&mut x);
        let back = m.matvec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut m = tridiag(3);
        m.set(2, 2, -1.0);
        assert!(matches!(m.cholesky(), Err(Error::NotPositiveDefinite { row: 2, .. })));
    }

    #[test]
    fn kron_matches_definition() {
        let a = tridiag(3);
        let mut b = SymmetricMatrix::zeros(2, 1);
        b.set(0, 0, 4.0);
        b.set(1, 1, 5.0);
        b.set(1, 0, 0.5);
        let k = SymmetricMatrix::kron(&a, &b);
        for i in 0..6 {
            for j in 0..6 {
                let e = a.get(i / 2, j / 2) * b.get(i % 2, j % 2);
                assert_eq!(k.get(i, j), e);
            }
        }
    }

    #[test]
    fn coordinate_dump_round_trip() {
        let m = tridiag(4).scaled(0.1);
        let mut buf = Vec::new();
        m.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("order 4 symmetric\n"));
        let back = SymmetricMatrix::<f64>::read_coordinate(&buf[..]).unwrap();
        assert_eq!(back, m);
        assert!(SymmetricMatrix::<f64>::read_coordinate(&b"order x\n"[..]).is_err());
    }
}
