use super::accumulate::{accumulate_subspace, Accumulation};
use super::postprocess::{filter_sort_flag, flag_spurious, relative_residual, trace_error};
use super::report::Reporter;
use super::{EigenResult, KernelOptions, Task};
use crate::linalg::Mat;
use crate::params::{check_problem, FeastParams, InfoCode};
use crate::quadrature::{build_contour, gauss_legendre, Contour};
use crate::reduced_eig::{generalized_eig_with_factor, spd_factor_with_threshold};
use crate::scalar::Scalar;
use num_complex::Complex64;
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use std::io::Write;
use std::ops::Range;

/// Pivots of the unit-diagonal scaled `B_Q` at or below this value end the
/// usable part of the subspace.
const REDUCED_PIVOT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Init,
    WarmStart { start: usize },
    Factorize,
    FactorizeAdjoint,
    Solve,
    SolveAdjoint,
    MultiplyA { start: usize },
    MultiplyB { start: usize },
    Refine { start: usize },
    Done,
}

/// Reverse-communication FEAST engine.
///
/// `FeastRci<f64>` is the real symmetric variant and `FeastRci<Complex64>`
/// the complex Hermitian one. Drive it by calling [`FeastRci::step`] until
/// it returns [`Task::Done`], servicing each task in between:
///
/// * [`Task::Factorize`]: factorize `ze() B - A`.
/// * [`Task::FactorizeAdjoint`]: factorize `(ze() B - A)^H` (only when the
///   caller declared it cannot reuse the direct factorization).
/// * [`Task::Solve`] / [`Task::SolveAdjoint`]: overwrite [`FeastRci::work2_mut`]
///   with the solution of the direct / adjoint system.
/// * [`Task::MultiplyA`] / [`Task::MultiplyB`]: write `A` (or `B`) times the
///   columns [`FeastRci::multiply_columns`] of `X` into the same columns of
///   `work1`; [`FeastRci::multiply_io`] hands out both blocks.
pub struct FeastRci<T: Scalar> {
    n: usize,
    m0: usize,
    m0_start: usize,
    emin: f64,
    emax: f64,
    fpm: FeastParams,
    options: KernelOptions,
    phase: Phase,
    task: Task,
    info: InfoCode,

    contour: Option<Contour>,
    point: usize,
    ze: Complex64,
    loops: usize,
    trace_prev: Option<f64>,
    epsout: f64,

    y: Mat<T>,
    q: Mat<T>,
    x: Mat<T>,
    work1: Mat<T>,
    work2: Mat<Complex64>,
    a_q: Mat<T>,
    b_q: Mat<T>,
    lambda: Vec<f64>,
    res: Vec<f64>,
    m: usize,
    block: Range<usize>,

    rng: Xoshiro256PlusPlus,
    reporter: Option<Reporter>,
    initial_guess: Option<Mat<T>>,
}

impl<T: Scalar> FeastRci<T> {
    /// Creates a kernel in the `Init` state. Argument problems are reported
    /// through `info` by the first call to [`FeastRci::step`].
    pub fn new(n: usize, fpm: FeastParams, emin: f64, emax: f64, m0: usize, options: KernelOptions) -> Self {
        let rng = Xoshiro256PlusPlus::seed_from_u64(options.seed);
        Self {
            n,
            m0,
            m0_start: m0,
            emin,
            emax,
            fpm,
            options,
            phase: Phase::Init,
            task: Task::Init,
            info: InfoCode::SUCCESS,
            contour: None,
            point: 0,
            ze: Complex64::new(0.0, 0.0),
            loops: 0,
            trace_prev: None,
            epsout: 1.0,
            y: Mat::zeros(0, 0),
            q: Mat::zeros(0, 0),
            x: Mat::zeros(0, 0),
            work1: Mat::zeros(0, 0),
            work2: Mat::zeros(0, 0),
            a_q: Mat::zeros(0, 0),
            b_q: Mat::zeros(0, 0),
            lambda: Vec::new(),
            res: Vec::new(),
            m: 0,
            block: 0..0,
            rng,
            reporter: None,
            initial_guess: None,
        }
    }

    /// Supplies the starting subspace used when `fpm(5) = 1` (an `n x m0`
    /// column-major block, typically the eigenvectors of a nearby problem).
    pub fn with_initial_guess(mut self, x: Mat<T>) -> Self {
        self.initial_guess = Some(x);
        self
    }

    /// Redirects the runtime report (printed when `fpm(1) = 1`).
    pub fn with_report_sink(mut self, sink: Box<dyn Write + Send>) -> Self {
        self.reporter = Some(Reporter::new(sink));
        self
    }

    pub fn adjoint_capable(&self) -> bool {
        self.options.adjoint_capable
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Current subspace size; shrinks if the projected `B` loses definiteness.
    pub fn m0(&self) -> usize {
        self.m0
    }

    /// The control vector as seen by the kernel, including slots 24/25.
    pub fn fpm(&self) -> &FeastParams {
        &self.fpm
    }

    pub fn info(&self) -> InfoCode {
        self.info
    }

    pub fn loops(&self) -> usize {
        self.loops
    }

    pub fn epsout(&self) -> f64 {
        self.epsout
    }

    /// Shift of the pending factorize/solve request.
    pub fn ze(&self) -> Complex64 {
        self.ze
    }

    pub fn contour(&self) -> Option<&Contour> {
        self.contour.as_ref()
    }

    /// Index of the contour point the pending factorize/solve belongs to.
    pub fn contour_index(&self) -> usize {
        self.point
    }

    /// The `n x m0` right-hand-side/solution block of a solve request.
    pub fn work2(&self) -> &[Complex64] {
        &self.work2.as_slice()[..self.n * self.m0]
    }

    pub fn work2_mut(&mut self) -> &mut [Complex64] {
        let len = self.n * self.m0;
        &mut self.work2.as_mut_slice()[..len]
    }

    /// Zero-based column range of the pending multiply request.
    pub fn multiply_columns(&self) -> Range<usize> {
        self.block.clone()
    }

    /// `(X[:, cols], work1[:, cols])` for the pending multiply request.
    pub fn multiply_io(&mut self) -> (&[T], &mut [T]) {
        let range = self.block.start * self.n..self.block.end * self.n;
        (&self.x.as_slice()[range.clone()], &mut self.work1.as_mut_slice()[range])
    }

    pub fn x(&self) -> &Mat<T> {
        &self.x
    }

    pub fn work1_mut(&mut self) -> &mut Mat<T> {
        &mut self.work1
    }

    /// Snapshot of the outputs. Meaningful once `step` returned `Done`.
    pub fn result(&self) -> EigenResult<T> {
        let width = self.m0_start;
        let mut e = vec![0.0; width];
        let mut res = vec![0.0; width];
        let k = self.lambda.len().min(width);
        e[..k].copy_from_slice(&self.lambda[..k]);
        res[..k].copy_from_slice(&self.res[..k]);
        let x = if self.x.nrows() == self.n && self.x.ncols() == width {
            self.x.clone()
        } else {
            Mat::zeros(self.n, width)
        };
        EigenResult {
            e,
            x,
            m: self.m,
            m0: self.m0,
            res,
            epsout: self.epsout,
            loops: self.loops,
            info: self.info,
        }
    }

    /// Advances the state machine past the task just serviced and returns
    /// the next one.
    pub fn step(&mut self) -> Task {
        let task = match self.phase {
            Phase::Init => self.initialize(),
            Phase::WarmStart { start } => {
                self.take_block_into_y(start);
                self.next_block(start, Phase::WarmStart { start: 0 }).unwrap_or_else(|| self.start_contour())
            }
            Phase::Factorize => {
                if T::IS_COMPLEX && !self.options.adjoint_capable {
                    self.phase = Phase::FactorizeAdjoint;
                    Task::FactorizeAdjoint
                } else {
                    self.request_solve()
                }
            }
            Phase::FactorizeAdjoint => self.request_solve(),
            Phase::Solve => {
                let variant = if T::IS_COMPLEX { Accumulation::HermitianDirect } else { Accumulation::Symmetric };
                self.accumulate(variant);
                if T::IS_COMPLEX {
                    self.load_rhs();
                    self.phase = Phase::SolveAdjoint;
                    Task::SolveAdjoint
                } else {
                    self.next_point()
                }
            }
            Phase::SolveAdjoint => {
                self.accumulate(Accumulation::HermitianAdjoint);
                self.next_point()
            }
            Phase::MultiplyA { start } => {
                self.store_block(start, true);
                self.next_block(start, Phase::MultiplyA { start: 0 }).unwrap_or_else(|| {
                    self.set_block(0);
                    self.phase = Phase::MultiplyB { start: 0 };
                    Task::MultiplyB
                })
            }
            Phase::MultiplyB { start } => {
                self.store_block(start, false);
                self.next_block(start, Phase::MultiplyB { start: 0 }).unwrap_or_else(|| self.rayleigh_ritz())
            }
            Phase::Refine { start } => {
                self.take_block_into_y(start);
                self.next_block(start, Phase::Refine { start: 0 }).unwrap_or_else(|| self.start_contour())
            }
            Phase::Done => Task::Done,
        };
        self.task = task;
        task
    }

    /// Ends the solve with `info` (e.g. when the caller's factorization
    /// failed). Returns [`Task::Done`].
    pub fn abort(&mut self, info: InfoCode) -> Task {
        self.lambda.clear();
        self.res.clear();
        self.m = 0;
        let task = self.finish(info);
        self.task = task;
        task
    }

    fn routine_name(&self) -> String {
        self.options.routine.clone().unwrap_or_else(|| {
            if T::IS_COMPLEX {
                format!("{}FEAST_HRCI", T::PREFIX)
            } else {
                format!("{}FEAST_SRCI", T::PREFIX)
            }
        })
    }

    fn initialize(&mut self) -> Task {
        if self.fpm.print_runtime() && self.reporter.is_none() {
            self.reporter = Some(Reporter::new(Box::new(std::io::stdout())));
        }
        if !self.fpm.print_runtime() {
            self.reporter = None;
        }
        let routine = self.routine_name();
        let (fpm, emin, emax, m0) = (self.fpm, self.emin, self.emax, self.m0);
        if let Some(r) = self.reporter.as_mut() {
            r.begin(&routine, &fpm, emin, emax, m0);
        }

        let problem = check_problem(self.n as i64, self.m0 as i64, self.emin, self.emax);
        if !problem.is_success() {
            return self.finish(problem);
        }
        let params = self.fpm.validate();
        if !params.is_success() {
            return self.finish(params);
        }
        let rule = match gauss_legendre(self.fpm.contour_points()) {
            Ok(rule) => rule,
            Err(_) => return self.finish(InfoCode::parameter(2)),
        };
        self.contour = match build_contour(&rule, self.emin, self.emax) {
            Ok(c) => Some(c),
            Err(_) => return self.finish(InfoCode::BAD_INTERVAL),
        };

        let (n, m0) = (self.n, self.m0);
        self.y = Mat::zeros(n, m0);
        self.q = Mat::zeros(n, m0);
        self.work1 = Mat::zeros(n, m0);
        self.work2 = Mat::zeros(n, m0);
        self.a_q = Mat::zeros(n, m0);
        self.b_q = Mat::zeros(n, m0);
        self.x = Mat::zeros(n, m0);

        if self.fpm.initial_guess() {
            match self.initial_guess.take() {
                Some(guess) if guess.nrows() == n && guess.ncols() >= m0 => {
                    self.x = guess.leading(n, m0);
                }
                // X is the 13th argument of the common interface
                _ => return self.finish(InfoCode::argument(13)),
            }
            self.set_block(0);
            self.phase = Phase::WarmStart { start: 0 };
            return Task::MultiplyB;
        }

        for j in 0..m0 {
            for i in 0..n {
                let a = uniform(&mut self.rng);
                let b = if T::IS_COMPLEX { uniform(&mut self.rng) } else { 0.0 };
                self.y[(i, j)] = T::from_uniform_pair(a, b);
            }
        }
        self.start_contour()
    }

    fn block_size(&self) -> usize {
        self.options.multiply_block.unwrap_or(self.m0).clamp(1, self.m0.max(1))
    }

    fn set_block(&mut self, start: usize) {
        let end = (start + self.block_size()).min(self.m0);
        self.block = start..end;
        self.fpm.set_slot(24, start as i32 + 1);
        self.fpm.set_slot(25, (end - start) as i32);
    }

    /// Moves to the block after `start`, or returns `None` when all columns
    /// have been served.
    fn next_block(&mut self, start: usize, phase: Phase) -> Option<Task> {
        let next = start + self.block_size();
        if next >= self.m0 {
            return None;
        }
        self.set_block(next);
        self.phase = match phase {
            Phase::WarmStart { .. } => Phase::WarmStart { start: next },
            Phase::MultiplyA { .. } => Phase::MultiplyA { start: next },
            Phase::MultiplyB { .. } => Phase::MultiplyB { start: next },
            Phase::Refine { .. } => Phase::Refine { start: next },
            other => other,
        };
        Some(match phase {
            Phase::MultiplyA { .. } => Task::MultiplyA,
            _ => Task::MultiplyB,
        })
    }

    fn take_block_into_y(&mut self, start: usize) {
        let range = start * self.n..self.block.end * self.n;
        self.y.as_mut_slice()[range.clone()].copy_from_slice(&self.work1.as_slice()[range]);
    }

    fn store_block(&mut self, start: usize, is_a: bool) {
        let range = start * self.n..self.block.end * self.n;
        let dst = if is_a { &mut self.a_q } else { &mut self.b_q };
        dst.as_mut_slice()[range.clone()].copy_from_slice(&self.work1.as_slice()[range]);
    }

    fn start_contour(&mut self) -> Task {
        self.q.as_mut_slice().fill(T::zero());
        self.point = 0;
        self.request_factorize()
    }

    fn request_factorize(&mut self) -> Task {
        let contour = self.contour.as_ref().expect("contour built at init");
        self.ze = contour.points[self.point].z;
        self.phase = Phase::Factorize;
        Task::Factorize
    }

    fn load_rhs(&mut self) {
        let len = self.n * self.m0;
        for (w, &y) in self.work2.as_mut_slice()[..len].iter_mut().zip(&self.y.as_slice()[..len]) {
            *w = y.to_complex();
        }
    }

    fn request_solve(&mut self) -> Task {
        self.load_rhs();
        self.phase = Phase::Solve;
        Task::Solve
    }

    fn accumulate(&mut self, variant: Accumulation) {
        let contour = self.contour.as_ref().expect("contour built at init");
        let p = contour.points[self.point];
        let len = self.n * self.m0;
        accumulate_subspace(
            &mut self.q.as_mut_slice()[..len],
            &self.work2.as_slice()[..len],
            p.weight,
            contour.radius,
            p.theta,
            variant,
        );
    }

    fn next_point(&mut self) -> Task {
        self.point += 1;
        if self.point < self.contour.as_ref().map_or(0, Contour::len) {
            return self.request_factorize();
        }
        let len = self.n * self.m0;
        self.x.as_mut_slice()[..len].copy_from_slice(&self.q.as_slice()[..len]);
        if self.fpm.subspace_only() {
            self.m = 0;
            return self.finish(InfoCode::SUBSPACE_ONLY);
        }
        self.set_block(0);
        self.phase = Phase::MultiplyA { start: 0 };
        Task::MultiplyA
    }

    /// Shrinks every block to its leading `m0` columns; the dropped columns
    /// of `X` are zeroed.
    fn shrink(&mut self, m0: usize) {
        let n = self.n;
        self.x.as_mut_slice()[m0 * n..].fill(T::zero());
        self.m0 = m0;
        if let Some(r) = self.reporter.as_mut() {
            r.shrink(m0);
        }
    }

    fn rayleigh_ritz(&mut self) -> Task {
        let (n, m0) = (self.n, self.m0);
        let q = self.q.leading(n, m0);
        let aq_full = self.a_q.leading(n, m0);
        let bq_full = self.b_q.leading(n, m0);
        let mut aq = q.adjoint_matmul(&aq_full);
        let mut bq = q.adjoint_matmul(&bq_full);
        aq.hermitianize();
        bq.hermitianize();

        // Unit-diagonal scaling so that the pivot threshold is relative.
        let mut scale = vec![0.0; m0];
        let mut usable = m0;
        for (j, s) in scale.iter_mut().enumerate() {
            let d = bq[(j, j)].re();
            if !(d > 0.0) || !d.is_finite() {
                usable = usable.min(j);
                break;
            }
            *s = 1.0 / d.sqrt();
        }
        if usable == 0 {
            return self.finish(InfoCode::REDUCED_SOLVER);
        }
        let scaled = |m: &Mat<T>, k: usize| Mat::from_fn(k, k, |i, j| m[(i, j)].scale(scale[i] * scale[j]));
        let mut k = usable;
        let factor = loop {
            match spd_factor_with_threshold(&scaled(&bq, k), REDUCED_PIVOT_THRESHOLD) {
                Ok(f) => break f,
                Err(j) => {
                    k = j - 1;
                    if k == 0 {
                        return self.finish(InfoCode::REDUCED_SOLVER);
                    }
                }
            }
        };
        if k < m0 {
            self.shrink(k);
        }
        let m0 = self.m0;
        let (eps, phi_scaled) = match generalized_eig_with_factor(&scaled(&aq, m0), &factor) {
            Ok(v) => v,
            Err(_) => return self.finish(InfoCode::REDUCED_SOLVER),
        };
        let phi = Mat::from_fn(m0, m0, |i, j| phi_scaled[(i, j)].scale(scale[i]));

        let q = q.leading(n, m0);
        let x = q.matmul(&phi);
        let ax = aq_full.leading(n, m0).matmul(&phi);
        let bx = bq_full.leading(n, m0).matmul(&phi);
        self.x.as_mut_slice()[..n * m0].copy_from_slice(x.as_slice());
        self.res = (0..m0).map(|j| relative_residual(ax.col(j), bx.col(j), eps[j], self.emin, self.emax)).collect();
        self.lambda = eps;
        // Outliers are flagged on every loop so a ghost Ritz value inside the
        // interval cannot keep the trace from settling.
        let floor = self.spurious_floor();
        let ghosts = flag_spurious(&self.lambda, &mut self.res, self.emin, self.emax, floor);

        let mut x_active = self.x.leading(n, m0);
        self.m = filter_sort_flag(&mut self.lambda, &mut x_active, &mut self.res, self.emin, self.emax);
        self.x.as_mut_slice()[..n * m0].copy_from_slice(x_active.as_slice());

        let trace: f64 = self.lambda[..self.m].iter().sum();
        self.epsout = trace_error(trace, self.trace_prev, self.emin, self.emax);
        self.trace_prev = Some(trace);
        let max_res = self.res[..self.m].iter().fold(0.0f64, |a, &b| a.max(b));
        let (loops, m, epsout) = (self.loops, self.m, self.epsout);
        if let Some(r) = self.reporter.as_mut() {
            r.iteration(loops, m, trace, epsout, max_res);
        }

        if self.m == 0 {
            return self.finish(InfoCode::NO_EIGENVALUE);
        }
        // Judged once the iteration stops: early loops can hold transient
        // Ritz values inside the interval. A subspace filled by in-interval
        // pairs may be missing some, unless it spans the whole space.
        let too_small = self.m >= self.m0 && self.m0 == self.m0_start && self.m0 < self.n;
        let tol = self.fpm.tolerance();
        let converged = if self.fpm.residual_criterion() { max_res < tol } else { self.epsout < tol };
        // Ghosts usually drift out of the interval with more loops, so the
        // iteration only stops early once none is left. At the loop limit
        // the converged pairs stand and remaining ghosts stay flagged.
        if (converged && ghosts == 0) || self.loops >= self.fpm.max_loops() {
            let info = match (too_small, converged) {
                (true, _) => InfoCode::SUBSPACE_TOO_SMALL,
                (false, true) => InfoCode::SUCCESS,
                (false, false) => InfoCode::NO_CONVERGENCE,
            };
            return self.finish(info);
        }
        self.loops += 1;
        self.set_block(0);
        self.phase = Phase::Refine { start: 0 };
        Task::MultiplyB
    }

    fn spurious_floor(&self) -> f64 {
        10f64.powi(-self.fpm.slot(3).min(crate::params::MAX_DOUBLE_EXPONENT) + 4)
    }

    fn finish(&mut self, info: InfoCode) -> Task {
        self.info = info;
        if matches!(info.value(), 0 | 2 | 3) && !self.lambda.is_empty() {
            let floor = self.spurious_floor();
            if flag_spurious(&self.lambda, &mut self.res, self.emin, self.emax, floor) > 0 {
                let (n, m0) = (self.n, self.m0);
                let mut x_active = self.x.leading(n, m0);
                self.m = filter_sort_flag(&mut self.lambda, &mut x_active, &mut self.res, self.emin, self.emax);
                self.x.as_mut_slice()[..n * m0].copy_from_slice(x_active.as_slice());
            }
        }
        self.fpm.set_slot(24, 0);
        self.fpm.set_slot(25, 0);
        self.block = 0..0;
        if let Some(r) = self.reporter.as_mut() {
            r.end(info);
        }
        self.phase = Phase::Done;
        Task::Done
    }
}

fn uniform(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
}
