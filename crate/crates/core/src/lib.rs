//! Contour-integration eigensolver for real symmetric and complex Hermitian
//! pencils `A x = lambda B x`.
//!
//! All eigenpairs inside a search interval `[emin, emax]` are obtained by
//! applying a quadrature approximation of the spectral projector to a block
//! of vectors, followed by Rayleigh-Ritz and subspace iteration.
//!
//! * [`kernel`] is the reverse-communication engine: it never touches a
//!   matrix and instead asks its caller to factorize, solve and multiply.
//! * [`backend`] provides ready-made callers for dense, banded and CSR
//!   storage, each built around a named [`backend::ShiftedSolver`] strategy.
//! * [`io`] and [`cli`] implement the coordinate-file batch driver.

pub mod backend;
pub mod cli;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod params;
pub mod quadrature;
pub mod reduced_eig;
pub mod scalar;

pub use backend::{
    feast_hb, feast_hcsr, feast_he, feast_sb, feast_scsr, feast_sy, BandedMatrix, CsrMatrix, DenseMatrix,
    DriverOptions, Uplo,
};
pub use kernel::{EigenResult, FeastRci, KernelOptions, Task};
pub use num_complex::Complex64;
pub use params::{check_problem, feastinit, FeastParams, InfoCode};
pub use scalar::Scalar;
