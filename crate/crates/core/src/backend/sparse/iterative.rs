use super::csr::{shifted_apply, Csr};
use crate::backend::{Problem, ShiftedFactor, ShiftedSolver, SolverError, SolverSettings, Storage};
use crate::scalar::Scalar;
use num_complex::Complex64;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Jacobi-preconditioned BiCGStab on `z B - A`; nothing is factorized.
pub struct IterativeSolver<T> {
    a: Arc<Csr<T>>,
    b: Option<Arc<Csr<T>>>,
    tolerance: f64,
    max_iterations: usize,
}

impl<T: Scalar> IterativeSolver<T> {
    pub fn new(problem: &Problem<T>, settings: &SolverSettings) -> Result<Self, SolverError> {
        let unsupported = |format| SolverError::UnsupportedFormat { solver: "sparse-iterative".into(), format };
        let a = match &problem.a {
            Storage::Sparse(m) => Arc::new(m.clone()),
            other => return Err(unsupported(other.format())),
        };
        let b = match &problem.b {
            None => None,
            Some(Storage::Sparse(m)) => Some(Arc::new(m.clone())),
            Some(other) => return Err(unsupported(other.format())),
        };
        Ok(Self { a, b, tolerance: settings.iterative_tolerance, max_iterations: settings.iterative_max_iterations })
    }
}

impl<T: Scalar> ShiftedSolver for IterativeSolver<T> {
    fn name(&self) -> &str {
        "sparse-iterative"
    }

    fn factorize(&self, z: Complex64) -> Result<Box<dyn ShiftedFactor>, SolverError> {
        let n = self.a.dim();
        let mut inv_diag = Vec::with_capacity(n);
        for i in 0..n {
            let bii = self.b.as_ref().map_or(Complex64::new(1.0, 0.0), |b| b.get(i, i).to_complex());
            let d = z * bii - self.a.get(i, i).to_complex();
            inv_diag.push(if d == ZERO { Complex64::new(1.0, 0.0) } else { Complex64::new(1.0, 0.0) / d });
        }
        Ok(Box::new(ShiftedIterative {
            a: self.a.clone(),
            b: self.b.clone(),
            z,
            inv_diag,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }))
    }
}

struct ShiftedIterative<T> {
    a: Arc<Csr<T>>,
    b: Option<Arc<Csr<T>>>,
    z: Complex64,
    inv_diag: Vec<Complex64>,
    tolerance: f64,
    max_iterations: usize,
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

impl<T: Scalar> ShiftedIterative<T> {
    /// Solves `(w B - A) x = rhs` in place, `w` being `z` or `conj(z)`.
    fn bicgstab(&self, rhs: &mut [Complex64], adjoint: bool) -> Result<(), SolverError> {
        let n = rhs.len();
        let (w, conj_precond) = if adjoint { (self.z.conj(), true) } else { (self.z, false) };
        let precond = |v: &[Complex64], out: &mut [Complex64]| {
            for ((o, &x), &d) in out.iter_mut().zip(v).zip(&self.inv_diag) {
                *o = x * if conj_precond { d.conj() } else { d };
            }
        };
        let op = |v: &[Complex64], out: &mut [Complex64]| shifted_apply(&self.a, self.b.as_deref(), w, v, out);

        let bnorm = norm(rhs);
        if bnorm == 0.0 {
            return Ok(());
        }
        let mut x = vec![ZERO; n];
        let mut r = rhs.to_vec();
        let r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let mut v = vec![ZERO; n];
        let mut p = vec![ZERO; n];
        let mut p_hat = vec![ZERO; n];
        let mut s_hat = vec![ZERO; n];
        let mut t = vec![ZERO; n];
        let mut residual = 1.0;
        for _ in 0..self.max_iterations {
            let rho_new = dot(&r_hat, &r);
            if rho_new == ZERO {
                return Err(SolverError::Breakdown);
            }
            let beta = (rho_new / rho) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            precond(&p, &mut p_hat);
            op(&p_hat, &mut v);
            let denom = dot(&r_hat, &v);
            if denom == ZERO {
                return Err(SolverError::Breakdown);
            }
            alpha = rho_new / denom;
            // r now holds s = r - alpha v.
            for i in 0..n {
                r[i] -= alpha * v[i];
                x[i] += alpha * p_hat[i];
            }
            residual = norm(&r) / bnorm;
            if residual <= self.tolerance {
                rhs.copy_from_slice(&x);
                return Ok(());
            }
            precond(&r, &mut s_hat);
            op(&s_hat, &mut t);
            let tt = dot(&t, &t);
            if tt == ZERO {
                return Err(SolverError::Breakdown);
            }
            omega = dot(&t, &r) / tt;
            for i in 0..n {
                x[i] += omega * s_hat[i];
                r[i] -= omega * t[i];
            }
            residual = norm(&r) / bnorm;
            if residual <= self.tolerance {
                rhs.copy_from_slice(&x);
                return Ok(());
            }
            if omega == ZERO || !residual.is_finite() {
                return Err(SolverError::Breakdown);
            }
            rho = rho_new;
        }
        Err(SolverError::NotConverged { iterations: self.max_iterations, residual })
    }
}

impl<T: Scalar> ShiftedFactor for ShiftedIterative<T> {
    fn solve(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError> {
        let n = self.a.dim();
        rhs[..n * ncols].chunks_mut(n.max(1)).try_for_each(|c| self.bicgstab(c, false))
    }

    fn solve_adjoint(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError> {
        let n = self.a.dim();
        rhs[..n * ncols].chunks_mut(n.max(1)).try_for_each(|c| self.bicgstab(c, true))
    }
}
