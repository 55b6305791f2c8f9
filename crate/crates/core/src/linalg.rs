//! Column-major dense blocks and the few level-3 kernels the solver needs.

use crate::scalar::Scalar;
use std::ops::{Index, IndexMut};

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_col_major(nrows: usize, ncols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), nrows * ncols, "data length does not match shape");
        Self { nrows, ncols, data }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for j in 0..ncols {
            for i in 0..nrows {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// Leading `rows x cols` block as a new matrix.
    pub fn leading(&self, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(i, j)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.ncols, other.nrows);
        let mut out = Mat::zeros(self.nrows, other.ncols);
        for j in 0..other.ncols {
            let oc = out.col_mut(j);
            for k in 0..self.ncols {
                let b = other[(k, j)];
                if b == T::zero() {
                    continue;
                }
                for (o, &a) in oc.iter_mut().zip(self.col(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^H * other`.
    pub fn adjoint_matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.nrows, other.nrows);
        Mat::from_fn(self.ncols, other.ncols, |i, j| crate::scalar::dot_conj(self.col(i), other.col(j)))
    }

    /// Replaces `self` by `(self + self^H) / 2`.
    pub fn hermitianize(&mut self) {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        for j in 0..n {
            let d = self[(j, j)];
            self[(j, j)] = T::from_real(d.re());
            for i in j + 1..n {
                let avg = (self[(i, j)] + self[(j, i)].conj()).scale(0.5);
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[i + j * self.nrows]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[i + j * self.nrows]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn adjoint_matmul_matches_explicit_adjoint() {
        let a = Mat::from_fn(3, 2, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 0.5));
        let b = Mat::from_fn(3, 2, |i, j| Complex64::new((i * j) as f64, 1.0));
        assert_eq!(a.adjoint_matmul(&b), a.adjoint().matmul(&b));
    }

    #[test]
    fn hermitianize_makes_real_diagonal() {
        let mut a = Mat::from_fn(2, 2, |i, j| Complex64::new((i + j) as f64, i as f64 - j as f64 + 0.25));
        a.hermitianize();
        assert_eq!(a[(0, 0)].im, 0.0);
        assert_eq!(a[(1, 0)], a[(0, 1)].conj());
    }
}
