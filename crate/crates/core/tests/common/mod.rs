#![allow(dead_code)]

use feast::linalg::Mat;
use feast::{Complex64, CsrMatrix, Scalar, Uplo};
use nalgebra::DMatrix;
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub struct TestRng(Xoshiro256PlusPlus);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform in [-1, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn scalar<T: Scalar>(&mut self) -> T {
        let re = self.uniform();
        let im = if T::IS_COMPLEX { self.uniform() } else { 0.0 };
        T::from_uniform_pair(re, im)
    }
}

pub fn random_hermitian<T: Scalar>(n: usize, rng: &mut TestRng) -> Mat<T> {
    let mut a = Mat::from_fn(n, n, |_, _| rng.scalar::<T>());
    a.hermitianize();
    a
}

/// `G^H G + n I` for a random `G`.
pub fn random_spd<T: Scalar>(n: usize, rng: &mut TestRng) -> Mat<T> {
    let g = Mat::from_fn(n, n, |_, _| rng.scalar::<T>());
    let mut b = g.adjoint_matmul(&g);
    for i in 0..n {
        b[(i, i)] += T::from_real(n as f64);
    }
    b.hermitianize();
    b
}

fn to_nalgebra<T: Scalar>(m: &Mat<T>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].to_complex())
}

/// Full spectrum of `A x = lambda B x`, ascending, by Cholesky reduction and
/// a dense Hermitian eigensolver.
pub fn oracle_eigenvalues<T: Scalar>(a: &Mat<T>, b: Option<&Mat<T>>) -> Vec<f64> {
    let a = to_nalgebra(a);
    let c = match b {
        None => a,
        Some(b) => {
            let l = to_nalgebra(b).cholesky().expect("B must be positive definite").l();
            let y = l.solve_lower_triangular(&a).expect("nonsingular L");
            let c = l.solve_lower_triangular(&y.adjoint()).expect("nonsingular L");
            (c.clone() + c.adjoint()) * Complex64::new(0.5, 0.0)
        }
    };
    let mut e: Vec<f64> = nalgebra::SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn laplacian_eigenvalue(n: usize, k: usize) -> f64 {
    2.0 - 2.0 * (std::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos()
}

pub fn laplacian(i: usize, j: usize) -> f64 {
    match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    }
}

pub fn laplacian_csr(n: usize) -> CsrMatrix<f64> {
    let mut ia = vec![1];
    let mut ja = Vec::new();
    let mut values = Vec::new();
    for i in 0..n {
        for j in i..(i + 2).min(n) {
            ja.push(j + 1);
            values.push(laplacian(i, j));
        }
        ia.push(ja.len() + 1);
    }
    CsrMatrix::new(n, Uplo::Upper, ia, ja, values)
}

/// `(A x_j - lambda_j B x_j)` relative residual recomputed from scratch.
pub fn true_residual<T: Scalar>(a: &Mat<T>, b: Option<&Mat<T>>, lambda: f64, x: &[T], scale: f64) -> f64 {
    let xm = Mat::from_col_major(x.len(), 1, x.to_vec());
    let ax = a.matmul(&xm);
    let bx = match b {
        Some(b) => b.matmul(&xm),
        None => xm,
    };
    let num: f64 = ax.as_slice().iter().zip(bx.as_slice()).map(|(&p, &q)| (p - q.scale(lambda)).modulus()).sum();
    let den: f64 = bx.as_slice().iter().map(|v| v.modulus()).sum::<f64>() * scale;
    num / den
}
