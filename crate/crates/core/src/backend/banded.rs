use super::{
    hermitian_entry, rejected, solve_problem, DriverOptions, LinearOperator, Problem, ShiftedFactor, ShiftedSolver,
    SolverError, Storage, Uplo,
};
use crate::kernel::EigenResult;
use crate::params::{check_problem, FeastParams, InfoCode};
use crate::scalar::Scalar;
use num_complex::Complex64;

/// Band storage with `k` off-diagonals on each side.
///
/// With `Full` storage column `j` holds `a(i, j)` at row `k + i - j`
/// (`lda >= 2k + 1`); with `Upper` at row `k + i - j` for `i <= j`, and
/// with `Lower` at row `i - j` for `i >= j` (`lda >= k + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    pub n: usize,
    pub k: usize,
    pub lda: usize,
    pub uplo: Uplo,
    pub values: Vec<T>,
}

impl<T: Scalar> BandedMatrix<T> {
    pub fn new(n: usize, k: usize, lda: usize, uplo: Uplo, values: Vec<T>) -> Self {
        Self { n, k, lda, uplo, values }
    }

    /// Band of a full matrix, entries beyond `k` dropped.
    pub fn from_fn(n: usize, k: usize, uplo: Uplo, f: impl Fn(usize, usize) -> T) -> Self {
        let lda = if uplo == Uplo::Full { 2 * k + 1 } else { k + 1 };
        let mut values = vec![T::zero(); lda * n];
        for j in 0..n {
            for i in j.saturating_sub(k)..(j + k + 1).min(n) {
                if uplo.stores(i, j) {
                    values[Self::row(uplo, k, i, j) + j * lda] = f(i, j);
                }
            }
        }
        Self { n, k, lda, uplo, values }
    }

    fn row(uplo: Uplo, k: usize, i: usize, j: usize) -> usize {
        match uplo {
            Uplo::Lower => i - j,
            _ => k + i - j,
        }
    }

    fn required_lda(&self) -> usize {
        if self.uplo == Uplo::Full {
            2 * self.k + 1
        } else {
            self.k + 1
        }
    }

    /// Argument positions `p` (bandwidth), `p + 1` (values), `p + 2` (lda).
    fn check(&self, n: usize, p: usize) -> Result<(), InfoCode> {
        if self.n != n {
            return Err(InfoCode::argument(p + 1));
        }
        if n > 0 && self.k >= n {
            return Err(InfoCode::argument(p));
        }
        if self.lda < self.required_lda() {
            return Err(InfoCode::argument(p + 2));
        }
        if self.values.len() < self.lda * n {
            return Err(InfoCode::argument(p + 1));
        }
        Ok(())
    }

    pub fn expand(&self) -> Band<T> {
        let get = |i: usize, j: usize| self.values[Self::row(self.uplo, self.k, i, j) + j * self.lda];
        Band::from_fn(self.n, self.k, |i, j| hermitian_entry(self.uplo, i, j, get))
    }
}

/// Full band with `k` sub- and super-diagonals; `(i, j)` lives at
/// `data[(k + i - j) + j (2k + 1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band<T> {
    n: usize,
    k: usize,
    data: Vec<T>,
}

impl<T: Scalar> Band<T> {
    pub fn from_fn(n: usize, k: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let ld = 2 * k + 1;
        let mut data = vec![T::zero(); ld * n];
        for j in 0..n {
            for i in j.saturating_sub(k)..(j + k + 1).min(n) {
                data[k + i - j + j * ld] = f(i, j);
            }
        }
        Self { n, k, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.k
    }

    /// Entry `(i, j)`, zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i.abs_diff(j) > self.k {
            T::zero()
        } else {
            self.data[self.k + i - j + j * (2 * self.k + 1)]
        }
    }
}

impl<T: Scalar> LinearOperator<T> for Band<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T], y: &mut [T], ncols: usize) {
        let (n, k) = (self.n, self.k);
        for c in 0..ncols {
            let xc = &x[c * n..(c + 1) * n];
            for i in 0..n {
                let mut s = T::zero();
                for (j, &xj) in xc.iter().enumerate().take((i + k + 1).min(n)).skip(i.saturating_sub(k)) {
                    s += self.get(i, j) * xj;
                }
                y[c * n + i] = s;
            }
        }
    }
}

pub fn feast_sb(
    a: &BandedMatrix<f64>,
    b: Option<&BandedMatrix<f64>>,
    fpm: &FeastParams,
    emin: f64,
    emax: f64,
    m0: usize,
    options: DriverOptions<f64>,
) -> EigenResult<f64> {
    let routine = if b.is_some() { "DFEAST_SBGV" } else { "DFEAST_SBEV" };
    feast_banded(a, b, fpm, emin, emax, m0, routine, options)
}

pub fn feast_hb(
    a: &BandedMatrix<Complex64>,
    b: Option<&BandedMatrix<Complex64>>,
    fpm: &FeastParams,
    emin: f64,
    emax: f64,
    m0: usize,
    options: DriverOptions<Complex64>,
) -> EigenResult<Complex64> {
    let routine = if b.is_some() { "ZFEAST_HBGV" } else { "ZFEAST_HBEV" };
    feast_banded(a, b, fpm, emin, emax, m0, routine, options)
}

#[allow(clippy::too_many_arguments)]
fn feast_banded<T: Scalar>(
    a: &BandedMatrix<T>,
    b: Option<&BandedMatrix<T>>,
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
    // Argument positions: UPLO, N, kla, A, LDA, klb, B, LDB.
    let checked = a.check(n, 3).and_then(|_| b.map_or(Ok(()), |b| b.check(n, 6)));
    if let Err(info) = checked {
        return rejected(n, m0, info);
    }
    let problem = Problem { a: Storage::Banded(a.expand()), b: b.map(|b| Storage::Banded(b.expand())) };
    solve_problem(&problem, fpm, emin, emax, m0, routine, options)
}

/// Band LU with partial pivoting. `U` gains up to `kl` extra
/// super-diagonals of fill, so each column holds `2 kl + ku + 1` rows with
/// `(i, j)` at row `kl + ku + i - j`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.ab[self.kl + self.ku + i - j + j * self.ldab()]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        let ld = self.ldab();
        &mut self.ab[self.kl + self.ku + i - j + j * ld]
    }

    /// Factors the `n x n` matrix with `kl = ku = k` given by `f`.
    pub fn factor(n: usize, k: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self, SolverError> {
        let (kl, ku) = (k, k);
        let mut lu = Self { n, kl, ku, ab: vec![Complex64::new(0.0, 0.0); (2 * kl + ku + 1) * n], pivots: Vec::with_capacity(n) };
        for j in 0..n {
            for i in j.saturating_sub(ku)..(j + kl + 1).min(n) {
                *lu.at_mut(i, j) = f(i, j);
            }
        }
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let p = (j..=j + km).max_by(|&a, &b| lu.at(a, j).norm().total_cmp(&lu.at(b, j).norm())).unwrap_or(j);
            lu.pivots.push(p);
            if lu.at(p, j).norm() == 0.0 {
                return Err(SolverError::ZeroPivot(j));
            }
            ju = ju.max((p + ku).min(n - 1));
            if p != j {
                for c in j..=ju {
                    let t = lu.at(j, c);
                    *lu.at_mut(j, c) = lu.at(p, c);
                    *lu.at_mut(p, c) = t;
                }
            }
            let inv = Complex64::new(1.0, 0.0) / lu.at(j, j);
            for i in j + 1..=j + km {
                *lu.at_mut(i, j) *= inv;
            }
            for c in j + 1..=ju {
                let u = lu.at(j, c);
                if u == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in j + 1..=j + km {
                    let l = lu.at(i, j);
                    *lu.at_mut(i, c) -= l * u;
                }
            }
        }
        Ok(lu)
    }

    fn solve_column(&self, x: &mut [Complex64]) {
        let (n, kl, kv) = (self.n, self.kl, self.kl + self.ku);
        for j in 0..n {
            x.swap(j, self.pivots[j]);
            let xj = x[j];
            for i in j + 1..(j + kl + 1).min(n) {
                x[i] -= self.at(i, j) * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.at(j, j);
            let xj = x[j];
            for i in j.saturating_sub(kv)..j {
                x[i] -= self.at(i, j) * xj;
            }
        }
    }

    fn solve_adjoint_column(&self, x: &mut [Complex64]) {
        let (n, kl, kv) = (self.n, self.kl, self.kl + self.ku);
        for j in 0..n {
            let mut s = x[j];
            for i in j.saturating_sub(kv)..j {
                s -= self.at(i, j).conj() * x[i];
            }
            x[j] = s / self.at(j, j).conj();
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for i in j + 1..(j + kl + 1).min(n) {
                s -= self.at(i, j).conj() * x[i];
            }
            x[j] = s;
            x.swap(j, self.pivots[j]);
        }
    }
}

impl ShiftedFactor for BandLu {
    fn solve(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError> {
        for c in rhs[..self.n * ncols].chunks_mut(self.n.max(1)) {
            self.solve_column(c);
        }
        Ok(())
    }

    fn solve_adjoint(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError> {
        for c in rhs[..self.n * ncols].chunks_mut(self.n.max(1)) {
            self.solve_adjoint_column(c);
        }
        Ok(())
    }
}

pub struct BandedSolver<T> {
    a: Band<T>,
    b: Option<Band<T>>,
}

impl<T: Scalar> BandedSolver<T> {
    pub fn new(problem: &Problem<T>) -> Result<Self, SolverError> {
        let unsupported = |format| SolverError::UnsupportedFormat { solver: "banded".into(), format };
        let a = match &problem.a {
            Storage::Banded(m) => m.clone(),
            other => return Err(unsupported(other.format())),
        };
        let b = match &problem.b {
            None => None,
            Some(Storage::Banded(m)) => Some(m.clone()),
            Some(other) => return Err(unsupported(other.format())),
        };
        Ok(Self { a, b })
    }
}

impl<T: Scalar> ShiftedSolver for BandedSolver<T> {
    fn name(&self) -> &str {
        "banded"
    }

    fn factorize(&self, z: Complex64) -> Result<Box<dyn ShiftedFactor>, SolverError> {
        let k = self.a.bandwidth().max(self.b.as_ref().map_or(0, Band::bandwidth));
        let n = self.a.dim();
        let lu = BandLu::factor(n, k, |i, j| {
            let bij = match &self.b {
                Some(b) => b.get(i, j).to_complex(),
                None if i == j => Complex64::new(1.0, 0.0),
                None => Complex64::new(0.0, 0.0),
            };
            z * bij - self.a.get(i, j).to_complex()
        })?;
        Ok(Box::new(lu))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Band matrix whose first column forces a pivot swap.
    fn entry(i: usize, j: usize) -> Complex64 {
        if i.abs_diff(j) > 2 {
            return c(0.0, 0.0);
        }
        let base = c((i as f64 + 1.0) * 0.3 - (j as f64) * 0.7, (i as f64 - j as f64) * 0.2);
        if i == 0 && j == 0 {
            c(1e-3, 0.0)
        } else if i == j {
            base + c(1.0, 0.5)
        } else {
            base
        }
    }

    fn mul(n: usize, adjoint: bool, x: &[Complex64]) -> Vec<Complex64> {
        (0..n)
            .map(|i| (0..n).map(|j| if adjoint { entry(j, i).conj() } else { entry(i, j) } * x[j]).sum())
            .collect()
    }

    #[test]
    fn band_lu_matches_products() {
        let n = 9;
        let lu = BandLu::factor(n, 2, entry).unwrap();
        let b: Vec<Complex64> = (0..n).map(|i| c(i as f64 - 3.0, 1.0 / (i as f64 + 1.0))).collect();
        let mut x = b.clone();
        lu.solve(&mut x, 1).unwrap();
        for (r, e) in mul(n, false, &x).iter().zip(&b) {
            assert!((r - e).norm() < 1e-11, "{r} vs {e}");
        }
        let mut y = b.clone();
        lu.solve_adjoint(&mut y, 1).unwrap();
        for (r, e) in mul(n, true, &y).iter().zip(&b) {
            assert!((r - e).norm() < 1e-11, "{r} vs {e}");
        }
    }

    #[test]
    fn full_storage_layout() {
        // Tridiagonal 4x4, rows {*, a12, a23, a34 / a11 .. a44 / a21, a32, a43, *}.
        let m = BandedMatrix::from_fn(4, 1, Uplo::Full, |i, j| (10 * (i + 1) + j + 1) as f64);
        assert_eq!(m.lda, 3);
        assert_eq!(&m.values[0..3], &[0.0, 11.0, 21.0]);
        assert_eq!(&m.values[3..6], &[12.0, 22.0, 32.0]);
        assert_eq!(&m.values[9..12], &[34.0, 44.0, 0.0]);
    }

    #[test]
    fn triangle_storage_expands_like_full() {
        let f = |i: usize, j: usize| if i.abs_diff(j) <= 1 { (1 + i.min(j)) as f64 + if i == j { 4.0 } else { 0.0 } } else { 0.0 };
        let full = BandedMatrix::from_fn(5, 1, Uplo::Full, f).expand();
        for uplo in [Uplo::Lower, Uplo::Upper] {
            let tri = BandedMatrix::from_fn(5, 1, uplo, f);
            assert_eq!(tri.lda, 2);
            assert_eq!(tri.expand(), full);
        }
    }

    #[test]
    fn band_operator_multiplies() {
        let band = Band::from_fn(3, 1, |i, j| (i + 2 * j) as f64);
        let mut y = vec![0.0; 3];
        band.apply(&[1.0, 1.0, 1.0], &mut y, 1);
        assert_eq!(y, vec![2.0, 9.0, 10.0]);
    }
}
