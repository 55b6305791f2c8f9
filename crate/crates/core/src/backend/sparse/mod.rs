mod csr;
mod iterative;
mod lu;
mod ordering;

pub use csr::Csr;
pub use iterative::IterativeSolver;
pub use lu::{SparseLu, SymbolicLu};
pub use ordering::fill_reducing_order;

use super::{rejected, solve_problem, DriverOptions, Problem, ShiftedFactor, ShiftedSolver, SolverError, SolverSettings, Storage, Uplo};
use crate::kernel::EigenResult;
use crate::params::{check_problem, FeastParams, InfoCode};
use crate::scalar::Scalar;
use num_complex::Complex64;
use std::sync::Arc;

/// One-based CSR as handed in by callers. With `Lower` or `Upper` only
/// that triangle is stored and the other half is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    pub n: usize,
    pub uplo: Uplo,
    pub ia: Vec<usize>,
    pub ja: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn new(n: usize, uplo: Uplo, ia: Vec<usize>, ja: Vec<usize>, values: Vec<T>) -> Self {
        Self { n, uplo, ia, ja, values }
    }

    /// Keeps the nonzero entries of `f` that belong to `uplo`.
    pub fn from_fn(n: usize, uplo: Uplo, f: impl Fn(usize, usize) -> T) -> Self {
        let mut ia = vec![1];
        let mut ja = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = f(i, j);
                if uplo.stores(i, j) && v != T::zero() {
                    ja.push(j + 1);
                    values.push(v);
                }
            }
            ia.push(ja.len() + 1);
        }
        Self { n, uplo, ia, ja, values }
    }

    pub fn nnz(&self) -> usize {
        self.ia.last().map_or(0, |&e| e.saturating_sub(1))
    }

    /// Argument positions `p` (values), `p + 1` (row pointers), `p + 2`
    /// (column indices).
    fn check(&self, n: usize, p: usize) -> Result<(), InfoCode> {
        if self.n != n || self.ia.len() != n + 1 || self.ia[0] != 1 || self.ia.windows(2).any(|w| w[1] < w[0]) {
            return Err(InfoCode::argument(p + 1));
        }
        let nnz = self.nnz();
        if self.ja.len() < nnz {
            return Err(InfoCode::argument(p + 2));
        }
        if self.values.len() < nnz {
            return Err(InfoCode::argument(p));
        }
        for i in 0..n {
            for k in self.ia[i] - 1..self.ia[i + 1] - 1 {
                let j = self.ja[k];
                if j == 0 || j > n || !self.uplo.stores(i, j - 1) {
                    return Err(InfoCode::argument(p + 2));
                }
            }
        }
        Ok(())
    }

    /// Zero-based full matrix with the implied half filled in.
    pub fn expand(&self) -> Csr<T> {
        let mut t = Vec::with_capacity(2 * self.nnz());
        for i in 0..self.n {
            for k in self.ia[i] - 1..self.ia[i + 1] - 1 {
                let (j, v) = (self.ja[k] - 1, self.values[k]);
                match self.uplo {
                    Uplo::Full => t.push((i, j, v)),
                    _ if i == j => t.push((i, i, T::from_real(v.re()))),
                    _ => {
                        t.push((i, j, v));
                        t.push((j, i, v.conj()));
                    }
                }
            }
        }
        Csr::from_triplets(self.n, t)
    }
}

pub fn feast_scsr(
    a: &CsrMatrix<f64>,
    b: Option<&CsrMatrix<f64>>,
    fpm: &FeastParams,
    emin: f64,
    emax: f64,
    m0: usize,
    options: DriverOptions<f64>,
) -> EigenResult<f64> {
    let routine = if b.is_some() { "DFEAST_SCSRGV" } else { "DFEAST_SCSREV" };
    feast_csr(a, b, fpm, emin, emax, m0, routine, options)
}

pub fn feast_hcsr(
    a: &CsrMatrix<Complex64>,
    b: Option<&CsrMatrix<Complex64>>,
    fpm: &FeastParams,
    emin: f64,
    emax: f64,
    m0: usize,
    options: DriverOptions<Complex64>,
) -> EigenResult<Complex64> {
    let routine = if b.is_some() { "ZFEAST_HCSRGV" } else { "ZFEAST_HCSREV" };
    feast_csr(a, b, fpm, emin, emax, m0, routine, options)
}

#[allow(clippy::too_many_arguments)]
fn feast_csr<T: Scalar>(
    a: &CsrMatrix<T>,
    b: Option<&CsrMatrix<T>>,
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
    // Argument positions: UPLO, N, sa, isa, jsa, sb, isb, jsb.
    let checked = a.check(n, 3).and_then(|_| b.map_or(Ok(()), |b| b.check(n, 6)));
    if let Err(info) = checked {
        return rejected(n, m0, info);
    }
    let problem = Problem { a: Storage::Sparse(a.expand()), b: b.map(|b| Storage::Sparse(b.expand())) };
    solve_problem(&problem, fpm, emin, emax, m0, routine, options)
}

/// Fill-reducing ordering and symbolic analysis once per pencil, numeric LU
/// with iterative refinement per shift.
pub struct SparseDirectSolver<T> {
    a: Arc<Csr<T>>,
    b: Option<Arc<Csr<T>>>,
    symbolic: Arc<SymbolicLu>,
    refinement_steps: usize,
}

impl<T: Scalar> SparseDirectSolver<T> {
    pub fn new(problem: &Problem<T>, settings: &SolverSettings) -> Result<Self, SolverError> {
        let unsupported = |format| SolverError::UnsupportedFormat { solver: "sparse-direct".into(), format };
        let a = match &problem.a {
            Storage::Sparse(m) => Arc::new(m.clone()),
            other => return Err(unsupported(other.format())),
        };
        let b = match &problem.b {
            None => None,
            Some(Storage::Sparse(m)) => Some(Arc::new(m.clone())),
            Some(other) => return Err(unsupported(other.format())),
        };
        let symbolic = Arc::new(SymbolicLu::analyze(&a, b.as_deref()));
        Ok(Self { a, b, symbolic, refinement_steps: settings.refinement_steps })
    }
}

impl<T: Scalar> ShiftedSolver for SparseDirectSolver<T> {
    fn name(&self) -> &str {
        "sparse-direct"
    }

    fn factorize(&self, z: Complex64) -> Result<Box<dyn ShiftedFactor>, SolverError> {
        let lu = SparseLu::factor(self.symbolic.clone(), &self.a, self.b.as_deref(), z, self.refinement_steps)?;
        Ok(Box::new(lu))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiagonal(i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        }
    }

    #[test]
    fn one_based_layouts_of_the_tridiagonal_example() {
        let full = CsrMatrix::from_fn(4, Uplo::Full, tridiagonal);
        assert_eq!(full.ia, vec![1, 3, 6, 9, 11]);
        assert_eq!(full.ja, vec![1, 2, 1, 2, 3, 2, 3, 4, 3, 4]);
        let lower = CsrMatrix::from_fn(4, Uplo::Lower, tridiagonal);
        assert_eq!(lower.ia, vec![1, 2, 4, 6, 8]);
        assert_eq!(lower.ja, vec![1, 1, 2, 2, 3, 3, 4]);
        let upper = CsrMatrix::from_fn(4, Uplo::Upper, tridiagonal);
        assert_eq!(upper.ia, vec![1, 3, 5, 7, 8]);
        assert_eq!(upper.ja, vec![1, 2, 2, 3, 3, 4, 4]);
        assert_eq!(lower.expand(), full.expand());
        assert_eq!(upper.expand(), full.expand());
    }

    #[test]
    fn wrong_triangle_is_an_argument_error() {
        let mut lower = CsrMatrix::from_fn(4, Uplo::Lower, tridiagonal);
        lower.uplo = Uplo::Upper;
        assert_eq!(lower.check(4, 3), Err(InfoCode::argument(5)));
        let mut bad = CsrMatrix::from_fn(4, Uplo::Full, tridiagonal);
        bad.ia[0] = 0;
        assert_eq!(bad.check(4, 3), Err(InfoCode::argument(4)));
    }
}
