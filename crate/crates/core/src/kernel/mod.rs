//! Reverse-communication engine.

mod accumulate;
mod postprocess;
mod rci;
mod report;

pub use accumulate::{accumulate_subspace, Accumulation};
pub use postprocess::{filter_sort_flag, flag_spurious, relative_residual, residual, trace_error, SPURIOUS};
pub use rci::FeastRci;
pub use report::sci;

use crate::linalg::Mat;
use crate::params::InfoCode;

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 0x5EED_0000_FEA5_7001;

/// Request handed back to the caller by [`FeastRci::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Init,
    Done,
    Factorize,
    Solve,
    FactorizeAdjoint,
    SolveAdjoint,
    MultiplyA,
    MultiplyB,
}

impl Task {
    /// Numeric code of the classic interface.
    pub fn code(self) -> i32 {
        match self {
            Task::Init => -1,
            Task::Done => 0,
            Task::Factorize => 10,
            Task::Solve => 11,
            Task::FactorizeAdjoint => 20,
            Task::SolveAdjoint => 21,
            Task::MultiplyA => 30,
            Task::MultiplyB => 40,
        }
    }

    pub fn from_code(code: i32) -> Option<Task> {
        Some(match code {
            -1 => Task::Init,
            0 => Task::Done,
            10 => Task::Factorize,
            11 => Task::Solve,
            20 => Task::FactorizeAdjoint,
            21 => Task::SolveAdjoint,
            30 => Task::MultiplyA,
            40 => Task::MultiplyB,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct KernelOptions {
    pub seed: u64,
    /// Maximum number of columns per multiply request; `None` asks for all.
    pub multiply_block: Option<usize>,
    /// Hermitian only: the caller can solve with the adjoint using the
    /// direct factorization, so no separate adjoint factorization is requested.
    pub adjoint_capable: bool,
    /// Name printed in the runtime report.
    pub routine: Option<String>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, multiply_block: None, adjoint_capable: true, routine: None }
    }
}

/// Output of a solve.
///
/// `e`, `res` and the columns of `x` keep the caller's original `m0` even if
/// the subspace had to shrink; unused entries are zero. The first `m`
/// entries are the eigenpairs found in the interval, in ascending order.
#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    pub e: Vec<f64>,
    pub x: Mat<T>,
    pub m: usize,
    /// Subspace size at exit.
    pub m0: usize,
    pub res: Vec<f64>,
    pub epsout: f64,
    pub loops: usize,
    pub info: InfoCode,
}

impl<T> EigenResult<T> {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.e[..self.m]
    }

    pub fn residuals(&self) -> &[f64] {
        &self.res[..self.m]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().iter().fold(0.0, |a: f64, &b| a.max(b))
    }
}
