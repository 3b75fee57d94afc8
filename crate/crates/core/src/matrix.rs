//! Dense complex matrices over [`MpComplex`].

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::mp::{MpComplex, MpReal, Precision};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    prec: Precision,
    data: Vec<MpComplex>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: Precision) -> Self {
        Self { rows, cols, prec, data: alloc::vec![MpComplex::zero(prec); rows * cols] }
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = MpComplex::one(prec);
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        prec: Precision,
        mut f: impl FnMut(usize, usize) -> MpComplex,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, prec, data }
    }

    /// Builds a matrix from `f64` (re, im) pairs in row-major order.
    pub fn from_f64(rows: usize, cols: usize, entries: &[(f64, f64)], prec: Precision) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "from_f64",
                detail: format!("{} entries for a {rows}x{cols} matrix", entries.len()),
            });
        }
        Ok(Self::from_fn(rows, cols, prec, |i, j| {
            let (re, im) = entries[i * cols + j];
            MpComplex::from_f64(re, im, prec)
        }))
    }

    /// Diagonal matrix from its diagonal.
    pub fn diagonal(d: &[MpComplex], prec: Precision) -> Self {
        let mut m = Self::zeros(d.len(), d.len(), prec);
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn entries(&self) -> &[MpComplex] {
        &self.data
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op,
                detail: format!("{}x{} vs {}x{}", self.rows, self.cols, other.rows, other.cols),
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.prec, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, prec: self.prec, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, prec: self.prec, data })
    }

    pub fn scale(&self, k: &MpComplex) -> Self {
        let data = self.data.iter().map(|a| a * k).collect();
        Self { rows: self.rows, cols: self.cols, prec: self.prec, data }
    }

    pub fn scale_real(&self, k: &MpReal) -> Self {
        let data = self.data.iter().map(|a| a.scale(k)).collect();
        Self { rows: self.rows, cols: self.cols, prec: self.prec, data }
    }

    /// Matrix product. Exact-zero entries of `self` are skipped, which makes
    /// products with monomial (Pauli-like) left factors cost O(n²).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                detail: format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols),
            });
        }
        let (n, m, k) = (self.rows, other.cols, self.cols);
        let mut out = Self::zeros(n, m, self.prec);
        for i in 0..n {
            let row = &mut out.data[i * m..(i + 1) * m];
            for l in 0..k {
                let a = &self.data[i * k + l];
                if a.is_zero() {
                    continue;
                }
                let brow = &other.data[l * m..(l + 1) * m];
                if a.im.is_zero() {
                    for (c, b) in row.iter_mut().zip(brow) {
                        if b.is_zero() {
                            continue;
                        }
                        c.re += &(&a.re * &b.re);
                        c.im += &(&a.re * &b.im);
                    }
                } else {
                    for (c, b) in row.iter_mut().zip(brow) {
                        if b.is_zero() {
                            continue;
                        }
                        *c += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Ω · self · Ω†`, arranged so that `Ω` is always the left factor and its
    /// zeros are skipped: `Ω A Ω† = Ω (Ω A†)†`.
    pub fn conjugate_by(&self, omega: &Self) -> Result<Self> {
        let t = omega.matmul(&self.adjoint())?;
        omega.matmul(&t.adjoint())
    }

    /// Kronecker product; `self` indexes the slow (left) factor.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols, self.prec);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = &other[(k, l)];
                        if !b.is_zero() {
                            out[(i * other.rows + k, j * other.cols + l)] = a * b;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> MpComplex {
        let mut t = MpComplex::zero(self.prec);
        for i in 0..self.rows.min(self.cols) {
            t += &self[(i, i)];
        }
        t
    }

    /// `Tr_S` over the left factor of a `dS·dB`-dimensional operator.
    pub fn partial_trace_system(&self, ds: usize, db: usize) -> Result<Self> {
        self.check_bipartite(ds, db, "partial_trace_system")?;
        let mut out = Self::zeros(db, db, self.prec);
        for s in 0..ds {
            for k in 0..db {
                for l in 0..db {
                    let v = &self[(s * db + k, s * db + l)];
                    out[(k, l)] += v;
                }
            }
        }
        Ok(out)
    }

    /// `Tr_S(self · other)` without forming the full product.
    pub fn partial_trace_system_of_product(&self, other: &Self, ds: usize, db: usize) -> Result<Self> {
        self.check_bipartite(ds, db, "partial_trace_system_of_product")?;
        other.check_bipartite(ds, db, "partial_trace_system_of_product")?;
        let n = ds * db;
        let mut out = Self::zeros(db, db, self.prec);
        for s in 0..ds {
            for k in 0..db {
                let arow = &self.data[(s * db + k) * n..(s * db + k + 1) * n];
                for (m, a) in arow.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let brow = &other.data[m * n + s * db..m * n + (s + 1) * db];
                    let orow = &mut out.data[k * db..(k + 1) * db];
                    for (o, b) in orow.iter_mut().zip(brow) {
                        if !b.is_zero() {
                            *o += &(a * b);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn check_bipartite(&self, ds: usize, db: usize, op: &'static str) -> Result<()> {
        if !self.is_square() || self.rows != ds * db {
            return Err(Error::DimensionMismatch {
                op,
                detail: format!("{}x{} matrix is not {ds}x{db}-bipartite", self.rows, self.cols),
            });
        }
        Ok(())
    }

    /// Largest entry modulus, ‖A‖_max.
    pub fn max_abs(&self) -> MpReal {
        let mut m = MpReal::zero(self.prec);
        for a in &self.data {
            let v = a.abs();
            if v > m {
                m = v;
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<MpReal> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn frobenius(&self) -> MpReal {
        let mut s = MpReal::zero(self.prec);
        for a in &self.data {
            s += &a.norm_sqr();
        }
        s.sqrt()
    }

    /// `‖A − A†‖_max`.
    pub fn hermiticity_defect(&self) -> MpReal {
        let mut m = MpReal::zero(self.prec);
        for i in 0..self.rows {
            for j in i..self.cols {
                let v = (&self[(i, j)] - &self[(j, i)].conj()).abs();
                if v > m {
                    m = v;
                }
            }
        }
        m
    }

    /// Whether the matrix is Hermitian to `10^(-digits+slack)` relative to its size.
    pub fn is_hermitian(&self, slack: i32) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs().max(&MpReal::one(self.prec));
        self.hermiticity_defect() <= &self.prec.tolerance(slack) * &scale
    }

    /// Scales row `i` by `d[i]` (left multiplication by a diagonal matrix).
    pub fn scale_rows(&mut self, d: &[MpComplex]) {
        for (i, di) in d.iter().enumerate().take(self.rows) {
            for v in &mut self.data[i * self.cols..(i + 1) * self.cols] {
                if !v.is_zero() {
                    *v = &*v * di;
                }
            }
        }
    }

    /// Scales column `j` by `d[j]` (right multiplication by a diagonal matrix).
    pub fn scale_cols(&mut self, d: &[MpComplex]) {
        for i in 0..self.rows {
            for (v, dj) in self.data[i * self.cols..(i + 1) * self.cols].iter_mut().zip(d) {
                if !v.is_zero() {
                    *v = &*v * dj;
                }
            }
        }
    }

    /// Re-rounds every entry to `prec`.
    pub fn with_precision(&self, prec: Precision) -> Self {
        let data = self
            .data
            .iter()
            .map(|c| MpComplex::new(c.re.with_precision(prec), c.im.with_precision(prec)))
            .collect();
        Self { rows: self.rows, cols: self.cols, prec, data }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = MpComplex;
    fn index(&self, (i, j): (usize, usize)) -> &MpComplex {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut MpComplex {
        &mut self.data[i * self.cols + j]
    }
}
