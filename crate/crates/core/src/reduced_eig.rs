//! Dense solver for the small projected pencil `A_Q phi = eps B_Q phi`.
//!
//! Cholesky reduction to standard form, Householder tridiagonalization,
//! implicit QL with Wilkinson shifts, then back-transformation. Works for
//! both real symmetric and complex Hermitian pairs.

use crate::linalg::Mat;
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReducedError {
    /// 1-based index of the first pivot that failed.
    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
    #[error("tridiagonal QL iteration did not converge")]
    NoConvergence,
}

/// Lower-triangular factor `L` with `B = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Mat<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn factor(&self) -> &Mat<T> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Restricts the factor to its leading `k x k` block, which factors the
    /// leading block of the original matrix.
    pub fn truncate(&self, k: usize) -> Self {
        Self { l: self.l.leading(k, k) }
    }

    /// Overwrites `x` with `L^{-1} x`, column by column.
    fn forward(&self, x: &mut Mat<T>) {
        let n = self.dim();
        for c in 0..x.ncols() {
            let col = x.col_mut(c);
            for i in 0..n {
                let mut s = col[i];
                for k in 0..i {
                    s -= self.l[(i, k)] * col[k];
                }
                col[i] = s / self.l[(i, i)];
            }
        }
    }

    /// Overwrites `x` with `L^{-H} x`.
    fn backward_adjoint(&self, x: &mut Mat<T>) {
        let n = self.dim();
        for c in 0..x.ncols() {
            let col = x.col_mut(c);
            for i in (0..n).rev() {
                let mut s = col[i];
                for k in i + 1..n {
                    s -= self.l[(k, i)].conj() * col[k];
                }
                col[i] = s / self.l[(i, i)].conj();
            }
        }
    }
}

/// Cholesky factorization; a pivot that is not strictly positive fails with
/// its 1-based index.
pub fn spd_factor<T: Scalar>(b: &Mat<T>) -> Result<Cholesky<T>, usize> {
    spd_factor_with_threshold(b, 0.0)
}

/// Cholesky factorization that also rejects pivots `<= threshold`.
///
/// Partial progress is discarded on failure; the leading `j - 1` block of the
/// input is guaranteed to factor when `Err(j)` is returned.
pub fn spd_factor_with_threshold<T: Scalar>(b: &Mat<T>, threshold: f64) -> Result<Cholesky<T>, usize> {
    let n = b.nrows();
    assert_eq!(n, b.ncols(), "spd_factor needs a square matrix");
    let mut l = Mat::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = b[(j, j)].re();
        for k in 0..j {
            d -= l[(j, k)].abs_sqr();
        }
        if !(d > threshold) || !d.is_finite() {
            return Err(j + 1);
        }
        let djj = d.sqrt();
        l[(j, j)] = T::from_real(djj);
        for i in j + 1..n {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s.scale(1.0 / djj);
        }
    }
    Ok(Cholesky { l })
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues ascending and
/// orthonormal eigenvectors as columns.
pub fn hermitian_eig<T: Scalar>(a: &Mat<T>) -> Result<(Vec<f64>, Mat<T>), ReducedError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let (mut d, mut e, mut z) = tridiagonalize(a);
    tridiagonal_ql(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let vecs = Mat::from_fn(n, n, |r, c| z[(r, order[c])]);
    Ok((vals, vecs))
}

/// Householder reduction `A = Z T Z^H` with `T` real symmetric tridiagonal.
/// Returns the diagonal, the off-diagonal (`e[i]` couples `i` and `i+1`,
/// `e[n-1] = 0`) and `Z`.
fn tridiagonalize<T: Scalar>(a: &Mat<T>) -> (Vec<f64>, Vec<f64>, Mat<T>) {
    let n = a.nrows();
    let mut h = a.clone();
    h.hermitianize();
    let mut q = Mat::<T>::identity(n);
    let mut v = vec![T::zero(); n];

    for k in 0..n.saturating_sub(2) {
        let s = k + 1;
        let xnorm = (s..n).map(|i| h[(i, k)].abs_sqr()).sum::<f64>().sqrt();
        let tail = (s + 1..n).map(|i| h[(i, k)].abs_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        for i in s..n {
            v[i] = h[(i, k)];
        }
        v[s] += h[(s, k)].phase().scale(xnorm);
        let vnorm2: f64 = (s..n).map(|i| v[i].abs_sqr()).sum();
        let beta = 2.0 / vnorm2;

        // H <- P H, P = I - beta v v^H acting on rows s..n
        for j in 0..n {
            let w: T = (s..n).map(|i| v[i].conj() * h[(i, j)]).sum();
            let w = w.scale(beta);
            for i in s..n {
                let vi = v[i];
                h[(i, j)] -= vi * w;
            }
        }
        // H <- H P, acting on columns s..n
        for i in 0..n {
            let w: T = (s..n).map(|j| h[(i, j)] * v[j]).sum();
            let w = w.scale(beta);
            for j in s..n {
                let vj = v[j].conj();
                h[(i, j)] -= w * vj;
            }
        }
        // Q <- Q P
        for i in 0..n {
            let w: T = (s..n).map(|j| q[(i, j)] * v[j]).sum();
            let w = w.scale(beta);
            for j in s..n {
                let vj = v[j].conj();
                q[(i, j)] -= w * vj;
            }
        }
    }

    let d: Vec<f64> = (0..n).map(|i| h[(i, i)].re()).collect();
    let mut e = vec![0.0; n];
    // Unitary diagonal scaling turns the complex sub-diagonal real.
    let mut phase = T::one();
    for k in 0..n.saturating_sub(1) {
        let sub = h[(k + 1, k)];
        e[k] = sub.modulus();
        phase = phase * sub.phase();
        for i in 0..n {
            q[(i, k + 1)] *= phase;
        }
    }
    (d, e, q)
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal
/// matrix, accumulating the rotations into the columns of `z`.
fn tridiagonal_ql<T: Scalar>(d: &mut [f64], e: &mut [f64], z: &mut Mat<T>) -> Result<(), ReducedError> {
    let n = d.len();
    let max_sweeps = 30 * n.max(1);
    let mut sweeps = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > max_sweeps {
                return Err(ReducedError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..z.nrows() {
                    let zf = z[(k, i + 1)];
                    let zi = z[(k, i)];
                    z[(k, i + 1)] = zi.scale(s) + zf.scale(c);
                    z[(k, i)] = zi.scale(c) - zf.scale(s);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Solves `A phi = eps B phi` for Hermitian `a` and Hermitian positive
/// definite `b`. Eigenvalues are ascending; eigenvectors are
/// `B`-orthonormal.
pub fn generalized_eig<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Result<(Vec<f64>, Mat<T>), ReducedError> {
    let chol = spd_factor(b).map_err(ReducedError::NotPositiveDefinite)?;
    generalized_eig_with_factor(a, &chol)
}

/// As [`generalized_eig`] with `B = L L^H` already factored.
pub fn generalized_eig_with_factor<T: Scalar>(
    a: &Mat<T>,
    chol: &Cholesky<T>,
) -> Result<(Vec<f64>, Mat<T>), ReducedError> {
    let n = a.nrows();
    assert_eq!(n, chol.dim());
    if n == 1 {
        let l = chol.factor()[(0, 0)].re();
        let eps = a[(0, 0)].re() / (l * l);
        return Ok((vec![eps], Mat::from_col_major(1, 1, vec![T::from_real(1.0 / l)])));
    }
    // C = L^{-1} (L^{-1} A)^H = L^{-1} A L^{-H}
    let mut w = a.clone();
    chol.forward(&mut w);
    let mut c = w.adjoint();
    chol.forward(&mut c);
    c.hermitianize();
    let (vals, mut vecs) = hermitian_eig(&c)?;
    chol.backward_adjoint(&mut vecs);
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand_xoshiro::rand_core::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn uniform(rng: &mut Xoshiro256PlusPlus) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn random_mat<T: Scalar>(n: usize, m: usize, rng: &mut Xoshiro256PlusPlus) -> Mat<T> {
        Mat::from_fn(n, m, |_, _| T::from_uniform_pair(uniform(rng), uniform(rng)))
    }

    fn random_hermitian<T: Scalar>(n: usize, rng: &mut Xoshiro256PlusPlus) -> Mat<T> {
        let mut a = random_mat::<T>(n, n, rng);
        a.hermitianize();
        a
    }

    fn gram_plus<T: Scalar>(n: usize, shift: f64, rng: &mut Xoshiro256PlusPlus) -> Mat<T> {
        let g = random_mat::<T>(n, n, rng);
        let mut b = g.adjoint_matmul(&g);
        for i in 0..n {
            b[(i, i)] += T::from_real(shift);
        }
        b.hermitianize();
        b
    }

    fn check_pencil<T: Scalar>(a: &Mat<T>, b: &Mat<T>, vals: &[f64], phi: &Mat<T>, tol: f64) {
        let n = a.nrows();
        let ap = a.matmul(phi);
        let bp = b.matmul(phi);
        let scale = a.max_abs().max(1.0);
        for j in 0..n {
            for i in 0..n {
                let r = ap[(i, j)] - bp[(i, j)].scale(vals[j]);
                assert!(r.modulus() <= tol * scale * n as f64, "residual {} at ({i},{j})", r.modulus());
            }
        }
        let gram = phi.adjoint_matmul(&bp);
        for j in 0..n {
            for i in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - T::from_real(expect)).modulus() < tol, "B-orthonormality");
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_factors_to_identity() {
        let chol = spd_factor(&Mat::<f64>::identity(3)).unwrap();
        assert_eq!(chol.factor(), &Mat::identity(3));
    }

    #[test]
    fn negative_pivot_reports_index() {
        let b = Mat::from_col_major(2, 2, vec![1.0, 0.0, 0.0, -1.0]);
        assert_eq!(spd_factor(&b).unwrap_err(), 2);
        let z = Mat::from_col_major(2, 2, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(spd_factor(&z).unwrap_err(), 1);
    }

    #[test]
    fn gram_matrix_reconstructs() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        let g = random_mat::<f64>(10, 10, &mut rng);
        let mut b = g.adjoint_matmul(&g);
        for i in 0..10 {
            b[(i, i)] += 1e-6;
        }
        let chol = spd_factor(&b).unwrap();
        let l = chol.factor();
        let rec = l.matmul(&l.adjoint());
        for j in 0..10 {
            for i in 0..10 {
                assert!((rec[(i, j)] - b[(i, j)]).abs() <= 1e-12 * b.max_abs());
            }
        }
    }

    #[test]
    fn diagonal_pair() {
        let a = Mat::from_col_major(2, 2, vec![1.0, 0.0, 0.0, 3.0]);
        let (vals, phi) = generalized_eig(&a, &Mat::identity(2)).unwrap();
        assert_eq!(vals, vec![1.0, 3.0]);
        assert!((phi[(0, 0)].abs() - 1.0).abs() < 1e-15 && phi[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn two_by_two_laplacian() {
        let a = Mat::from_col_major(2, 2, vec![2.0, -1.0, -1.0, 2.0]);
        let (vals, phi) = generalized_eig(&a, &Mat::identity(2)).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((phi[(0, 0)].abs() - h).abs() < 1e-14);
        assert!((phi[(0, 0)] - phi[(1, 0)]).abs() < 1e-14);
        assert!((phi[(0, 1)] + phi[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn scalar_short_circuit() {
        let a = Mat::from_col_major(1, 1, vec![6.0]);
        let b = Mat::from_col_major(1, 1, vec![4.0]);
        let (vals, phi) = generalized_eig(&a, &b).unwrap();
        assert_eq!(vals, vec![1.5]);
        assert_eq!(phi[(0, 0)], 0.5);
    }

    #[test]
    fn random_real_pencil_residual_oracle() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        let a = random_hermitian::<f64>(8, &mut rng);
        let b = gram_plus::<f64>(8, 1.0, &mut rng);
        let (vals, phi) = generalized_eig(&a, &b).unwrap();
        check_pencil(&a, &b, &vals, &phi, 1e-10);
    }

    #[test]
    fn random_complex_pencil_residual_oracle() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(12);
        for n in [2, 3, 5, 13] {
            let a = random_hermitian::<Complex64>(n, &mut rng);
            let b = gram_plus::<Complex64>(n, 1.0, &mut rng);
            let (vals, phi) = generalized_eig(&a, &b).unwrap();
            check_pencil(&a, &b, &vals, &phi, 1e-10);
        }
    }

    #[test]
    fn reduction_round_trip_matches_standard_problem() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(13);
        let a = random_hermitian::<Complex64>(6, &mut rng);
        let b = gram_plus::<Complex64>(6, 0.5, &mut rng);
        let (vals, _) = generalized_eig(&a, &b).unwrap();
        let chol = spd_factor(&b).unwrap();
        // explicit L^{-1} A L^{-H} through solves on the identity
        let mut linv = Mat::<Complex64>::identity(6);
        chol.forward(&mut linv);
        let c = linv.matmul(&a).matmul(&linv.adjoint());
        let (std_vals, _) = hermitian_eig(&c).unwrap();
        for (x, y) in vals.iter().zip(&std_vals) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn repeated_eigenvalues_are_resolved() {
        let a = Mat::<f64>::identity(5);
        let (vals, vecs) = hermitian_eig(&a).unwrap();
        assert!(vals.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let g = vecs.adjoint_matmul(&vecs);
        assert!((g[(2, 2)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn output_length_equals_dimension() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        for n in 1..7 {
            let a = random_hermitian::<f64>(n, &mut rng);
            let (vals, vecs) = hermitian_eig(&a).unwrap();
            assert_eq!(vals.len(), n);
            assert_eq!((vecs.nrows(), vecs.ncols()), (n, n));
        }
    }
}
