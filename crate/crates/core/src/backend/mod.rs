//! Matrix-format callers of the reverse-communication kernel.
//!
//! Every way of solving `(z B - A) Q = Y` is a [`ShiftedSolver`] strategy
//! registered by name in a [`BackendRegistry`]; the driver loop in
//! [`run_feast`] is shared by all of them.

mod banded;
mod dense;
mod sparse;

pub use banded::{feast_hb, feast_sb, Band, BandedMatrix, BandedSolver};
pub use dense::{feast_he, feast_sy, DenseLu, DenseMatrix, DenseSolver};
pub use sparse::{
    feast_hcsr, feast_scsr, fill_reducing_order, Csr, CsrMatrix, IterativeSolver, SparseDirectSolver, SparseLu,
    SymbolicLu,
};

use crate::kernel::{EigenResult, FeastRci, KernelOptions, Task, DEFAULT_SEED};
use crate::linalg::Mat;
use crate::params::{FeastParams, InfoCode};
use crate::scalar::Scalar;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("zero pivot at column {0}")]
    ZeroPivot(usize),
    #[error("iterative solver stopped after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("iterative solver breakdown")]
    Breakdown,
    #[error("solver '{solver}' does not accept {format} storage")]
    UnsupportedFormat { solver: String, format: &'static str },
    #[error("unknown solver '{0}'")]
    UnknownSolver(String),
}

/// Which triangle of a Hermitian matrix is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uplo {
    Full,
    Lower,
    Upper,
}

impl Uplo {
    pub fn from_char(c: char) -> Option<Uplo> {
        match c.to_ascii_uppercase() {
            'F' => Some(Uplo::Full),
            'L' => Some(Uplo::Lower),
            'U' => Some(Uplo::Upper),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Uplo::Full => 'F',
            Uplo::Lower => 'L',
            Uplo::Upper => 'U',
        }
    }

    /// Whether entry `(i, j)` is part of the stored triangle.
    pub fn stores(self, i: usize, j: usize) -> bool {
        match self {
            Uplo::Full => true,
            Uplo::Lower => i >= j,
            Uplo::Upper => i <= j,
        }
    }
}

/// `y = M x` for `ncols` column-major columns of length `dim()`.
pub trait LinearOperator<T>: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T], ncols: usize);
}

/// A factorization of `z B - A` for one shift.
pub trait ShiftedFactor: Send + Sync {
    /// Overwrites `rhs` (`ncols` columns) with `(z B - A)^{-1} rhs`.
    fn solve(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError>;
    /// Overwrites `rhs` with `(z B - A)^{-H} rhs`.
    fn solve_adjoint(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError>;
}

/// Strategy for the shifted linear systems of one pencil.
pub trait ShiftedSolver: Send + Sync {
    fn name(&self) -> &str;
    fn factorize(&self, z: Complex64) -> Result<Box<dyn ShiftedFactor>, SolverError>;
}

/// A pencil matrix in one of the supported expanded storages.
#[derive(Debug, Clone)]
pub enum Storage<T> {
    Dense(Mat<T>),
    Banded(Band<T>),
    Sparse(Csr<T>),
}

impl<T: Scalar> Storage<T> {
    pub fn format(&self) -> &'static str {
        match self {
            Storage::Dense(_) => "dense",
            Storage::Banded(_) => "banded",
            Storage::Sparse(_) => "sparse",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Storage::Dense(m) => m.nrows(),
            Storage::Banded(b) => b.dim(),
            Storage::Sparse(c) => c.dim(),
        }
    }
}

impl<T: Scalar> LinearOperator<T> for Mat<T> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[T], y: &mut [T], ncols: usize) {
        let n = self.nrows();
        for c in 0..ncols {
            let xc = &x[c * n..(c + 1) * n];
            let yc = &mut y[c * n..(c + 1) * n];
            yc.fill(T::zero());
            for (j, &xj) in xc.iter().enumerate() {
                if xj == T::zero() {
                    continue;
                }
                for (yi, &a) in yc.iter_mut().zip(self.col(j)) {
                    *yi += a * xj;
                }
            }
        }
    }
}

impl<T: Scalar> LinearOperator<T> for Storage<T> {
    fn dim(&self) -> usize {
        Storage::dim(self)
    }

    fn apply(&self, x: &[T], y: &mut [T], ncols: usize) {
        match self {
            Storage::Dense(m) => m.apply(x, y, ncols),
            Storage::Banded(b) => b.apply(x, y, ncols),
            Storage::Sparse(c) => c.apply(x, y, ncols),
        }
    }
}

/// `A` and optional `B` (`None` means identity).
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub a: Storage<T>,
    pub b: Option<Storage<T>>,
}

impl<T: Scalar> Problem<T> {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn format(&self) -> &'static str {
        self.a.format()
    }
}

/// Tuning knobs passed to every solver factory.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub iterative_tolerance: f64,
    pub iterative_max_iterations: usize,
    pub refinement_steps: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { iterative_tolerance: 1e-3, iterative_max_iterations: 1000, refinement_steps: 2 }
    }
}

pub type SolverFactory<T> =
    Arc<dyn Fn(&Problem<T>, &SolverSettings) -> Result<Box<dyn ShiftedSolver>, SolverError> + Send + Sync>;

/// Named [`ShiftedSolver`] constructors.
pub struct BackendRegistry<T> {
    factories: BTreeMap<String, SolverFactory<T>>,
}

impl<T: Scalar> Default for BackendRegistry<T> {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl<T: Scalar> BackendRegistry<T> {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    /// `dense`, `banded`, `sparse-direct` and `sparse-iterative`.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("dense", |p, _| Ok(Box::new(DenseSolver::new(p)?) as Box<dyn ShiftedSolver>));
        r.register("banded", |p, _| Ok(Box::new(BandedSolver::new(p)?) as Box<dyn ShiftedSolver>));
        r.register("sparse-direct", |p, s| Ok(Box::new(SparseDirectSolver::new(p, s)?) as Box<dyn ShiftedSolver>));
        r.register("sparse-iterative", |p, s| Ok(Box::new(IterativeSolver::new(p, s)?) as Box<dyn ShiftedSolver>));
        r
    }

    pub fn register(
        &mut self,
        name: &str,
        factory: impl Fn(&Problem<T>, &SolverSettings) -> Result<Box<dyn ShiftedSolver>, SolverError> + Send + Sync + 'static,
    ) {
        self.factories.insert(name.to_string(), Arc::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn build(
        &self,
        name: &str,
        problem: &Problem<T>,
        settings: &SolverSettings,
    ) -> Result<Box<dyn ShiftedSolver>, SolverError> {
        let factory = self.factories.get(name).ok_or_else(|| SolverError::UnknownSolver(name.to_string()))?;
        factory(problem, settings)
    }
}

/// Default strategy for a storage format.
pub fn default_solver_name(format: &str) -> &'static str {
    match format {
        "dense" => "dense",
        "banded" => "banded",
        _ => "sparse-direct",
    }
}

pub struct DriverOptions<T> {
    pub seed: u64,
    /// Number of threads solving contour points concurrently; 0 or 1 is serial.
    pub parallel_contour: usize,
    pub multiply_block: Option<usize>,
    /// When false, Hermitian solves use a separate adjoint factorization.
    pub adjoint_capable: bool,
    /// Starting subspace, used when `fpm(5) = 1`.
    pub initial_guess: Option<Mat<T>>,
    /// Runtime report destination (stdout when `None` and `fpm(1) = 1`).
    pub report: Option<Box<dyn Write + Send>>,
    /// Registered solver name; the format's default when `None`.
    pub solver: Option<String>,
    pub settings: SolverSettings,
}

impl<T> Default for DriverOptions<T> {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            parallel_contour: 0,
            multiply_block: None,
            adjoint_capable: true,
            initial_guess: None,
            report: None,
            solver: None,
            settings: SolverSettings::default(),
        }
    }
}

impl<T> std::fmt::Debug for DriverOptions<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriverOptions")
            .field("seed", &self.seed)
            .field("parallel_contour", &self.parallel_contour)
            .field("multiply_block", &self.multiply_block)
            .field("adjoint_capable", &self.adjoint_capable)
            .field("initial_guess", &self.initial_guess.is_some())
            .field("solver", &self.solver)
            .finish()
    }
}

/// Result of an entry point whose arguments failed validation: no pairs,
/// `info` set.
pub(crate) fn rejected<T: Scalar>(n: usize, m0: usize, info: InfoCode) -> EigenResult<T> {
    EigenResult {
        e: vec![0.0; m0],
        x: Mat::zeros(n, m0),
        m: 0,
        m0,
        res: vec![0.0; m0],
        epsout: 0.0,
        loops: 0,
        info,
    }
}

/// Builds the solver named in `options` (or the format default) and runs
/// the kernel to completion. Solver construction or factorization failures
/// end the run with `info = -2`.
pub fn solve_problem<T: Scalar>(
    problem: &Problem<T>,
    fpm: &FeastParams,
    emin: f64,
    emax: f64,
    m0: usize,
    routine: &str,
    options: DriverOptions<T>,
) -> EigenResult<T> {
    let registry = BackendRegistry::<T>::with_defaults();
    solve_with_registry(&registry, problem, fpm, emin, emax, m0, routine, options)
}

#[allow(clippy::too_many_arguments)]
pub fn solve_with_registry<T: Scalar>(
    registry: &BackendRegistry<T>,
    problem: &Problem<T>,
    fpm: &FeastParams,
    emin: f64,
    emax: f64,
    m0: usize,
    routine: &str,
    mut options: DriverOptions<T>,
) -> EigenResult<T> {
    let name = options.solver.clone().unwrap_or_else(|| default_solver_name(problem.format()).to_string());
    let solver = registry.build(&name, problem, &options.settings);
    let n = problem.dim();
    let kernel_options = KernelOptions {
        seed: options.seed,
        multiply_block: options.multiply_block,
        adjoint_capable: options.adjoint_capable,
        routine: Some(routine.to_string()),
    };
    let mut rci = FeastRci::<T>::new(n, *fpm, emin, emax, m0, kernel_options);
    if let Some(x0) = options.initial_guess.take() {
        rci = rci.with_initial_guess(x0);
    }
    if let Some(sink) = options.report.take() {
        rci = rci.with_report_sink(sink);
    }
    match solver {
        Ok(solver) => run_feast(&mut rci, &problem.a, problem.b.as_ref().map(|b| b as &dyn LinearOperator<T>), solver.as_ref(), options.parallel_contour),
        Err(_) => {
            // Let Init report argument problems first.
            if rci.step() != Task::Done {
                rci.abort(InfoCode::INNER_SOLVER);
            }
            rci.result()
        }
    }
}

/// Services the kernel's requests until it is done.
///
/// With `parallel_contour > 1` all shifts are factorized up front and the
/// direct (and adjoint) systems of a whole contour sweep are solved
/// concurrently the first time a sweep asks for a solve; the kernel then
/// receives the cached solutions in its usual order, so results are
/// bitwise identical to the serial path.
pub fn run_feast<T: Scalar>(
    rci: &mut FeastRci<T>,
    a: &dyn LinearOperator<T>,
    b: Option<&dyn LinearOperator<T>>,
    solver: &dyn ShiftedSolver,
    parallel_contour: usize,
) -> EigenResult<T> {
    if parallel_contour > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(parallel_contour).build() {
            return pool.install(|| drive(rci, a, b, solver, true));
        }
    }
    drive(rci, a, b, solver, false)
}

fn drive<T: Scalar>(
    rci: &mut FeastRci<T>,
    a: &dyn LinearOperator<T>,
    b: Option<&dyn LinearOperator<T>>,
    solver: &dyn ShiftedSolver,
    parallel: bool,
) -> EigenResult<T> {
    let mut factor: Option<Box<dyn ShiftedFactor>> = None;
    let mut adjoint_factor: Option<Box<dyn ShiftedFactor>> = None;
    let mut all_factors: Vec<Box<dyn ShiftedFactor>> = Vec::new();
    let mut adjoint_factors: Vec<Box<dyn ShiftedFactor>> = Vec::new();
    let mut direct_cache: Vec<Vec<Complex64>> = Vec::new();
    let mut adjoint_cache: Vec<Vec<Complex64>> = Vec::new();

    loop {
        let task = rci.step();
        let outcome: Result<(), SolverError> = match task {
            Task::Done => break,
            Task::Init => Ok(()),
            Task::Factorize if parallel => {
                if all_factors.is_empty() {
                    let shifts: Vec<Complex64> =
                        rci.contour().map(|c| c.points.iter().map(|p| p.z).collect()).unwrap_or_default();
                    shifts.par_iter().map(|&z| solver.factorize(z)).collect::<Result<Vec<_>, _>>().map(|f| {
                        all_factors = f;
                    })
                } else {
                    Ok(())
                }
            }
            Task::Factorize => solver.factorize(rci.ze()).map(|f| factor = Some(f)),
            // Adjoint-capable factors serve both solves; otherwise the
            // conjugate shifts are factorized too, as in serial mode.
            Task::FactorizeAdjoint if parallel => {
                if adjoint_factors.is_empty() {
                    let shifts: Vec<Complex64> =
                        rci.contour().map(|c| c.points.iter().map(|p| p.z.conj()).collect()).unwrap_or_default();
                    shifts.par_iter().map(|&z| solver.factorize(z)).collect::<Result<Vec<_>, _>>().map(|f| {
                        adjoint_factors = f;
                    })
                } else {
                    Ok(())
                }
            }
            // (z B - A)^H = conj(z) B - A for Hermitian A and B.
            Task::FactorizeAdjoint => solver.factorize(rci.ze().conj()).map(|f| adjoint_factor = Some(f)),
            Task::Solve | Task::SolveAdjoint if parallel => {
                let adjoint = task == Task::SolveAdjoint;
                let k = rci.contour_index();
                let ncols = rci.m0();
                if k == 0 {
                    let rhs = rci.work2().to_vec();
                    let cache = if adjoint { &mut adjoint_cache } else { &mut direct_cache };
                    let separate = adjoint && !rci.adjoint_capable();
                    let factors = if separate { &adjoint_factors } else { &all_factors };
                    factors
                        .par_iter()
                        .map(|f| {
                            let mut x = rhs.clone();
                            let solved =
                                if adjoint && !separate { f.solve_adjoint(&mut x, ncols) } else { f.solve(&mut x, ncols) };
                            solved.map(|_| x)
                        })
                        .collect::<Result<Vec<_>, _>>()
                        .map(|sol| *cache = sol)
                } else {
                    Ok(())
                }
                .map(|_| {
                    let cache = if adjoint { &adjoint_cache } else { &direct_cache };
                    rci.work2_mut().copy_from_slice(&cache[k]);
                })
            }
            Task::Solve => {
                let ncols = rci.m0();
                let f = factor.as_ref().expect("factorize precedes solve");
                f.solve(rci.work2_mut(), ncols)
            }
            Task::SolveAdjoint => {
                let ncols = rci.m0();
                match adjoint_factor.as_ref() {
                    Some(f) if !rci.adjoint_capable() => f.solve(rci.work2_mut(), ncols),
                    _ => factor.as_ref().expect("factorize precedes solve").solve_adjoint(rci.work2_mut(), ncols),
                }
            }
            Task::MultiplyA => {
                let ncols = rci.multiply_columns().len();
                let (x, y) = rci.multiply_io();
                a.apply(x, y, ncols);
                Ok(())
            }
            Task::MultiplyB => {
                let ncols = rci.multiply_columns().len();
                let (x, y) = rci.multiply_io();
                match b {
                    Some(b) => b.apply(x, y, ncols),
                    None => y.copy_from_slice(x),
                }
                Ok(())
            }
        };
        if outcome.is_err() {
            rci.abort(InfoCode::INNER_SOLVER);
            break;
        }
    }
    rci.result()
}

/// Expands a stored triangle (or full matrix) given by `get(i, j)` into a
/// full Hermitian matrix. Diagonal imaginary parts are dropped for triangle
/// storage.
pub(crate) fn hermitian_entry<T: Scalar>(uplo: Uplo, i: usize, j: usize, get: impl Fn(usize, usize) -> T) -> T {
    match uplo {
        Uplo::Full => get(i, j),
        _ if i == j => T::from_real(get(i, i).re()),
        _ if uplo.stores(i, j) => get(i, j),
        _ => get(j, i).conj(),
    }
}
