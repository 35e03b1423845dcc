//! Dense complex matrices and the factorizations the precoders need.
//!
//! The toolkit only ever works with tall-or-square complex matrices of modest
//! size (hundreds of rows, tens of columns), so the implementation favors
//! clarity and numerical robustness over asymptotics. The singular value
//! decomposition uses one-sided Jacobi rotations, which deliver high relative
//! accuracy for the small singular values that drive the rank test used by
//! zero-forcing.

use crate::{fl, Error, Real, Result};
use num_complex::Complex;

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix from an element function.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column `j` as a slice.
    pub fn col(&self, j: usize) -> &[Complex<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Column `j` as a mutable slice.
    pub fn col_mut(&mut self, j: usize) -> &mut [Complex<T>] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for l in 0..self.cols {
                let b = other[(l, j)];
                if b.re == T::zero() && b.im == T::zero() {
                    continue;
                }
                let a_col = self.col(l);
                let out_col = out.col_mut(j);
                for i in 0..self.rows {
                    out_col[i] = out_col[i] + a_col[i] * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for l in 0..self.cols {
            let b = x[l];
            let a_col = self.col(l);
            for i in 0..self.rows {
                out[i] = out[i] + a_col[i] * b;
            }
        }
        out
    }

    /// Multiplies every entry by a real scalar.
    pub fn scale(&mut self, s: T) {
        for v in &mut self.data {
            *v = v.scale(s);
        }
    }

    /// Squared Euclidean norm of column `j`.
    pub fn col_norm_sq(&self, j: usize) -> T {
        self.col(j).iter().map(|v| v.norm_sqr()).sum()
    }

    /// Scales column `j` to unit Euclidean norm. No-op on a zero column.
    pub fn normalize_col(&mut self, j: usize) {
        let n = self.col_norm_sq(j).sqrt();
        if n > T::zero() {
            let inv = T::one() / n;
            for v in self.col_mut(j) {
                *v = v.scale(inv);
            }
        }
    }

    /// Frobenius norm.
    pub fn frob_norm(&self) -> T {
        self.data
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    /// Thin singular value decomposition via one-sided Jacobi rotations.
    ///
    /// Requires `rows >= cols`. Singular values are returned unsorted but
    /// paired with the columns of `u` and `v`; they carry high relative
    /// accuracy even when the matrix is nearly rank deficient.
    pub fn jacobi_svd(&self) -> Result<Svd<T>> {
        assert!(
            self.rows >= self.cols,
            "jacobi_svd requires a tall or square matrix"
        );
        let n = self.cols;
        let mut w = self.clone();
        let mut v = Self::eye(n);
        let tol = T::epsilon() * fl(8.0);
        let max_sweeps = 60;
        let mut converged = false;
        for _sweep in 0..max_sweeps {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let mut app = T::zero();
                    let mut aqq = T::zero();
                    let mut apq = Complex::new(T::zero(), T::zero());
                    {
                        let (wp, wq) = (w.col(p), w.col(q));
                        for i in 0..self.rows {
                            app += wp[i].norm_sqr();
                            aqq += wq[i].norm_sqr();
                            apq = apq + wp[i].conj() * wq[i];
                        }
                    }
                    let off = apq.norm();
                    if off <= tol * (app * aqq).sqrt() || off == T::zero() {
                        continue;
                    }
                    rotated = true;
                    // Phase so the implicit Gram off-diagonal becomes real,
                    // then an ordinary real Jacobi rotation annihilates it.
                    let phase = apq.unscale(off);
                    let tau = (aqq - app) / (fl::<T>(2.0) * off);
                    let t = if tau >= T::zero() {
                        T::one() / (tau + (T::one() + tau * tau).sqrt())
                    } else {
                        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                    };
                    let cs = T::one() / (T::one() + t * t).sqrt();
                    let sn = cs * t;
                    let sp = phase.conj().scale(sn);
                    let sq = phase.scale(sn);
                    rotate_pair(&mut w, p, q, cs, sp, sq);
                    rotate_pair(&mut v, p, q, cs, sp, sq);
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::SvdNonConvergence(max_sweeps));
        }
        let mut sigma = Vec::with_capacity(n);
        let mut u = w;
        for j in 0..n {
            let s = u.col_norm_sq(j).sqrt();
            sigma.push(s);
            if s > T::zero() {
                let inv = T::one() / s;
                for x in u.col_mut(j) {
                    *x = x.scale(inv);
                }
            }
        }
        Ok(Svd { u, sigma, v })
    }
}

/// In-place right-rotation of columns p and q:
/// `[w_p, w_q] <- [w_p*cs - w_q*sp, w_p*sq + w_q*cs]`.
fn rotate_pair<T: Real>(m: &mut CMat<T>, p: usize, q: usize, cs: T, sp: Complex<T>, sq: Complex<T>) {
    let rows = m.rows;
    for i in 0..rows {
        let a = m[(i, p)];
        let b = m[(i, q)];
        m[(i, p)] = a.scale(cs) - b * sp;
        m[(i, q)] = a * sq + b.scale(cs);
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// Thin SVD `A = U diag(sigma) V^H` with unsorted singular values.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: CMat<T>,
    pub sigma: Vec<T>,
    pub v: CMat<T>,
}

impl<T: Real> Svd<T> {
    /// Ratio of smallest to largest singular value; zero for an all-zero matrix.
    pub fn condition_ratio(&self) -> T {
        let mut lo = T::infinity();
        let mut hi = T::zero();
        for &s in &self.sigma {
            if s < lo {
                lo = s;
            }
            if s > hi {
                hi = s;
            }
        }
        if hi == T::zero() {
            T::zero()
        } else {
            lo / hi
        }
    }

    /// `U diag(sigma^-1) V^H`, the right-inverse direction `A (A^H A)^-1`.
    pub fn right_inverse_columns(&self) -> CMat<T> {
        let n = self.sigma.len();
        let mut us = self.u.clone();
        for j in 0..n {
            let inv = T::one() / self.sigma[j];
            for x in us.col_mut(j) {
                *x = x.scale(inv);
            }
        }
        us.matmul(&self.v.hermitian())
    }
}

/// Hermitian inner product `x^H y`.
pub fn dot_h<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    let mut acc = Complex::new(T::zero(), T::zero());
    for (a, b) in x.iter().zip(y) {
        acc = acc + a.conj() * *b;
    }
    acc
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sq<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|v| v.norm_sqr()).sum()
}
