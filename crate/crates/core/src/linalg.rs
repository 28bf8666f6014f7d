//! Minimal dense complex matrices for the N <= 4 systems handled here.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{DetectError, Result};

pub type CVector = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(DetectError::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
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

    pub fn column(&self, c: usize) -> CVector {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[Complex64]) {
        for (r, x) in v.iter().enumerate() {
            self[(r, c)] = *x;
        }
    }

    /// Matrix whose k-th column is column `perm[k]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.rows, perm.len(), |r, c| self[(r, perm[c])])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(DetectError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).map(|k| self[(r, k)] * other[(k, c)]).sum()
        }))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<CVector> {
        if self.cols != v.len() {
            return Err(DetectError::Dimension(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect())
    }

    /// `self^* v` without materializing the adjoint.
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Result<CVector> {
        if self.rows != v.len() {
            return Err(DetectError::Dimension(format!(
                "adjoint of {}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].conj() * v[r]).sum())
            .collect())
    }

    pub fn scale_columns(&self, s: &[f64]) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * s[c])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - other[(r, c)])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Thin Householder QR of an m x k matrix (k <= m). Returns the k orthonormal
/// columns spanning the column space together with the diagonal of R.
pub(crate) fn householder_qr(a: &CMatrix) -> (Vec<CVector>, Vec<Complex64>, CMatrix) {
    let m = a.rows();
    let k = a.cols();
    let mut r = a.clone();
    let mut reflectors: Vec<CVector> = Vec::with_capacity(k);
    for j in 0..k {
        let x: CVector = (j..m).map(|i| r[(i, j)]).collect();
        let xnorm = norm_sqr(&x).sqrt();
        let mut v = x.clone();
        if xnorm > 0.0 {
            let phase = if x[0].norm() > 0.0 {
                x[0] / x[0].norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            v[0] += phase * xnorm;
        }
        let vnorm = norm_sqr(&v);
        if vnorm > 0.0 {
            for c in j..k {
                let col: CVector = (j..m).map(|i| r[(i, c)]).collect();
                let s = dot_conj(&v, &col) * (2.0 / vnorm);
                for (off, vi) in v.iter().enumerate() {
                    r[(j + off, c)] -= vi * s;
                }
            }
        }
        reflectors.push(v);
    }
    // Accumulate Q = H_0 H_1 ... H_{k-1} applied to the first k unit vectors.
    let mut q_cols = Vec::with_capacity(k);
    for j in 0..k {
        let mut e = vec![ZERO; m];
        e[j] = Complex64::new(1.0, 0.0);
        for (jj, v) in reflectors.iter().enumerate().rev() {
            let vnorm = norm_sqr(v);
            if vnorm == 0.0 {
                continue;
            }
            let s = dot_conj(v, &e[jj..]) * (2.0 / vnorm);
            for (off, vi) in v.iter().enumerate() {
                e[jj + off] -= vi * s;
            }
        }
        q_cols.push(e);
    }
    let diag = (0..k).map(|j| r[(j, j)]).collect();
    (q_cols, diag, r)
}
