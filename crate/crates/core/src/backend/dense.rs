use super::{hermitian_entry, rejected, solve_problem, DriverOptions, Problem, ShiftedFactor, ShiftedSolver, SolverError, Storage, Uplo};
use crate::kernel::EigenResult;
use crate::linalg::Mat;
use crate::params::{check_problem, FeastParams, InfoCode};
use crate::scalar::Scalar;
use num_complex::Complex64;

/// Column-major `n x n` matrix with leading dimension `lda`; with `Lower`
/// or `Upper` only that triangle is read.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    pub n: usize,
    pub lda: usize,
    pub uplo: Uplo,
    pub values: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(n: usize, lda: usize, uplo: Uplo, values: Vec<T>) -> Self {
        Self { n, lda, uplo, values }
    }

    pub fn from_mat(m: &Mat<T>, uplo: Uplo) -> Self {
        Self { n: m.nrows(), lda: m.nrows().max(1), uplo, values: m.as_slice().to_vec() }
    }

    /// `Err(p)` names the offending argument: `p` for the values, `p + 1`
    /// for the leading dimension.
    fn check(&self, n: usize, p: usize) -> Result<(), InfoCode> {
        if self.n != n {
            return Err(InfoCode::argument(p));
        }
        if self.lda < n.max(1) {
            return Err(InfoCode::argument(p + 1));
        }
        if self.values.len() < self.lda * n.saturating_sub(1) + n {
            return Err(InfoCode::argument(p));
        }
        Ok(())
    }

    pub fn expand(&self) -> Mat<T> {
        let get = |i: usize, j: usize| self.values[i + j * self.lda];
        Mat::from_fn(self.n, self.n, |i, j| hermitian_entry(self.uplo, i, j, get))
    }
}

pub fn feast_sy(
    a: &DenseMatrix<f64>,
    b: Option<&DenseMatrix<f64>>,
    fpm: &FeastParams,
    emin: f64,
    emax: f64,
    m0: usize,
    options: DriverOptions<f64>,
) -> EigenResult<f64> {
    let routine = if b.is_some() { "DFEAST_SYGV" } else { "DFEAST_SYEV" };
    feast_dense(a, b, fpm, emin, emax, m0, routine, options)
}

pub fn feast_he(
    a: &DenseMatrix<Complex64>,
    b: Option<&DenseMatrix<Complex64>>,
    fpm: &FeastParams,
    emin: f64,
    emax: f64,
    m0: usize,
    options: DriverOptions<Complex64>,
) -> EigenResult<Complex64> {
    let routine = if b.is_some() { "ZFEAST_HEGV" } else { "ZFEAST_HEEV" };
    feast_dense(a, b, fpm, emin, emax, m0, routine, options)
}

#[allow(clippy::too_many_arguments)]
fn feast_dense<T: Scalar>(
    a: &DenseMatrix<T>,
    b: Option<&DenseMatrix<T>>,
    fpm: &FeastParams,
    emin: f64,
    emax: f64,
    m0: usize,
    routine: &str,
    options: DriverOptions<T>,
) -> EigenResult<T> {
    let n = a.n;
    let problem_info = check_problem(n as i64, m0 as i64, emin, emax);
    if !problem_info.is_success() {
        return rejected(n, m0, problem_info);
    }
    // Argument positions: UPLO, N, A, LDA, B, LDB.
    let checked = a.check(n, 3).and_then(|_| b.map_or(Ok(()), |b| b.check(n, 5)));
    if let Err(info) = checked {
        return rejected(n, m0, info);
    }
    let problem = Problem { a: Storage::Dense(a.expand()), b: b.map(|b| Storage::Dense(b.expand())) };
    solve_problem(&problem, fpm, emin, emax, m0, routine, options)
}

/// `z B - A` as a dense complex matrix.
pub(crate) fn shifted_dense<T: Scalar>(a: &Mat<T>, b: Option<&Mat<T>>, z: Complex64) -> Mat<Complex64> {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| {
        let bij = match b {
            Some(b) => b[(i, j)].to_complex(),
            None if i == j => Complex64::new(1.0, 0.0),
            None => Complex64::new(0.0, 0.0),
        };
        z * bij - a[(i, j)].to_complex()
    })
}

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: Mat<Complex64>,
    // Row swapped with row k at step k.
    pivots: Vec<usize>,
}

impl DenseLu {
    pub fn factor(mut m: Mat<Complex64>) -> Result<Self, SolverError> {
        let n = m.nrows();
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm())).unwrap_or(k);
            pivots.push(p);
            if m[(p, k)].norm() == 0.0 {
                return Err(SolverError::ZeroPivot(k));
            }
            if p != k {
                for j in 0..n {
                    let t = m[(k, j)];
                    m[(k, j)] = m[(p, j)];
                    m[(p, j)] = t;
                }
            }
            let inv = Complex64::new(1.0, 0.0) / m[(k, k)];
            for i in k + 1..n {
                m[(i, k)] *= inv;
            }
            for j in k + 1..n {
                let ukj = m[(k, j)];
                if ukj == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in k + 1..n {
                    let lik = m[(i, k)];
                    m[(i, j)] -= lik * ukj;
                }
            }
        }
        Ok(Self { lu: m, pivots })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    fn solve_column(&self, x: &mut [Complex64]) {
        let n = self.dim();
        let lu = &self.lu;
        for (k, &p) in self.pivots.iter().enumerate() {
            x.swap(k, p);
        }
        for j in 0..n {
            let xj = x[j];
            for i in j + 1..n {
                x[i] -= lu[(i, j)] * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= lu[(j, j)];
            let xj = x[j];
            for i in 0..j {
                x[i] -= lu[(i, j)] * xj;
            }
        }
    }

    // M^H = U^H L^H P, so solve U^H, then L^H, then undo the swaps.
    fn solve_adjoint_column(&self, x: &mut [Complex64]) {
        let n = self.dim();
        let lu = &self.lu;
        for j in 0..n {
            let mut s = x[j];
            for i in 0..j {
                s -= lu[(i, j)].conj() * x[i];
            }
            x[j] = s / lu[(j, j)].conj();
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for i in j + 1..n {
                s -= lu[(i, j)].conj() * x[i];
            }
            x[j] = s;
        }
        for (k, &p) in self.pivots.iter().enumerate().rev() {
            x.swap(k, p);
        }
    }
}

impl ShiftedFactor for DenseLu {
    fn solve(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError> {
        let n = self.dim();
        for c in rhs[..n * ncols].chunks_mut(n.max(1)) {
            self.solve_column(c);
        }
        Ok(())
    }

    fn solve_adjoint(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError> {
        let n = self.dim();
        for c in rhs[..n * ncols].chunks_mut(n.max(1)) {
            self.solve_adjoint_column(c);
        }
        Ok(())
    }
}

pub struct DenseSolver<T> {
    a: Mat<T>,
    b: Option<Mat<T>>,
}

impl<T: Scalar> DenseSolver<T> {
    pub fn new(problem: &Problem<T>) -> Result<Self, SolverError> {
        let unsupported = |format| SolverError::UnsupportedFormat { solver: "dense".into(), format };
        let a = match &problem.a {
            Storage::Dense(m) => m.clone(),
            other => return Err(unsupported(other.format())),
        };
        let b = match &problem.b {
            None => None,
            Some(Storage::Dense(m)) => Some(m.clone()),
            Some(other) => return Err(unsupported(other.format())),
        };
        Ok(Self { a, b })
    }
}

impl<T: Scalar> ShiftedSolver for DenseSolver<T> {
    fn name(&self) -> &str {
        "dense"
    }

    fn factorize(&self, z: Complex64) -> Result<Box<dyn ShiftedFactor>, SolverError> {
        Ok(Box::new(DenseLu::factor(shifted_dense(&self.a, self.b.as_ref(), z))?))
    }
}
