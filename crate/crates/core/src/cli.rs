//! Batch driver: `<prefix>.in`, `<prefix>.A` and optionally `<prefix>.B`.

use crate::backend::{
    feast_hb, feast_hcsr, feast_he, feast_sb, feast_scsr, feast_sy, BandedMatrix, Csr, CsrMatrix, DenseMatrix,
    DriverOptions, SolverSettings, Uplo,
};
use crate::io::{coo_to_csr, parse_config, parse_coordinate, DriverConfig, IoError, ProblemKind};
use crate::kernel::{sci, EigenResult, DEFAULT_SEED};
use crate::params::{Classification, FeastParams, InfoCode};
use crate::scalar::Scalar;
use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dense,
    Banded,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Direct,
    Iterative,
}

/// Solves the eigenproblem described by `<prefix>.in`, `<prefix>.A` and
/// `<prefix>.B`.
#[derive(Debug, Clone, Parser)]
#[command(name = "feast-driver", version)]
pub struct DriverFlags {
    /// Path prefix of the input files.
    pub prefix: PathBuf,
    /// Seed of the random starting subspace.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads solving contour points concurrently.
    #[arg(long, default_value_t = 1)]
    pub parallel_contour: usize,
    /// Inner solver for the sparse format.
    #[arg(long, value_enum, default_value_t = SolverKind::Direct)]
    pub solver: SolverKind,
    /// Relative residual target of the iterative inner solver.
    #[arg(long, default_value_t = 1e-3)]
    pub iter_tol: f64,
    /// Storage used for the solve.
    #[arg(long, value_enum, default_value_t = Format::Sparse)]
    pub format: Format,
}

impl DriverFlags {
    pub fn new(prefix: impl Into<PathBuf>) -> Self {
        Self {
            prefix: prefix.into(),
            seed: DEFAULT_SEED,
            parallel_contour: 1,
            solver: SolverKind::Direct,
            iter_tol: 1e-3,
            format: Format::Sparse,
        }
    }
}

/// Failures that happen before the solver runs (exit code 2).
#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: IoError },
    #[error("{0}")]
    Usage(String),
}

/// Shared handle so the runtime report and the summary go to one stream.
#[derive(Clone)]
struct SharedWriter(Arc<Mutex<Box<dyn Write + Send>>>);

impl Write for SharedWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().expect("writer lock").write(buf)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.0.lock().expect("writer lock").flush()
    }
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn read(path: PathBuf) -> Result<(PathBuf, String), DriverError> {
    match std::fs::read_to_string(&path) {
        Ok(text) => Ok((path, text)),
        Err(source) => Err(DriverError::Read { path, source }),
    }
}

fn load_matrix<T: Scalar>(path: PathBuf, uplo: Uplo) -> Result<CsrMatrix<T>, DriverError> {
    let (path, text) = read(path)?;
    parse_coordinate::<T>(&text)
        .and_then(|coo| coo_to_csr(&coo, uplo))
        .map_err(|source| DriverError::Format { path, source })
}

fn solve<T: Scalar>(
    flags: &DriverFlags,
    config: &DriverConfig,
    a: CsrMatrix<T>,
    b: Option<CsrMatrix<T>>,
    report: SharedWriter,
    entry: Entry<T>,
) -> EigenResult<T> {
    let fpm = config.params();
    let m0 = config.m0 as usize;
    let options = DriverOptions {
        seed: flags.seed,
        parallel_contour: flags.parallel_contour,
        report: Some(Box::new(report)),
        solver: (flags.solver == SolverKind::Iterative).then(|| "sparse-iterative".to_string()),
        settings: SolverSettings { iterative_tolerance: flags.iter_tol, ..SolverSettings::default() },
        ..DriverOptions::default()
    };
    let (emin, emax) = (config.emin, config.emax);
    match flags.format {
        Format::Sparse => (entry.csr)(&a, b.as_ref(), &fpm, emin, emax, m0, options),
        Format::Dense => {
            let to_dense = |m: &CsrMatrix<T>| {
                let full = m.expand();
                DenseMatrix::new(m.n, m.n.max(1), Uplo::Full, (0..m.n * m.n).map(|k| full.get(k % m.n, k / m.n)).collect())
            };
            let b = b.as_ref().map(to_dense);
            (entry.dense)(&to_dense(&a), b.as_ref(), &fpm, emin, emax, m0, options)
        }
        Format::Banded => {
            let full_a = a.expand();
            let full_b = b.as_ref().map(CsrMatrix::expand);
            let k = bandwidth(&full_a).max(full_b.as_ref().map_or(0, bandwidth));
            let band_a = BandedMatrix::from_fn(a.n, k, Uplo::Full, |i, j| full_a.get(i, j));
            let band_b = full_b.map(|m| BandedMatrix::from_fn(a.n, k, Uplo::Full, |i, j| m.get(i, j)));
            (entry.banded)(&band_a, band_b.as_ref(), &fpm, emin, emax, m0, options)
        }
    }
}

fn bandwidth<T: Scalar>(m: &Csr<T>) -> usize {
    (0..m.dim()).flat_map(|i| m.row(i).map(move |(j, _)| i.abs_diff(j))).max().unwrap_or(0)
}

type CsrEntry<T> =
    fn(&CsrMatrix<T>, Option<&CsrMatrix<T>>, &FeastParams, f64, f64, usize, DriverOptions<T>) -> EigenResult<T>;
type DenseEntry<T> =
    fn(&DenseMatrix<T>, Option<&DenseMatrix<T>>, &FeastParams, f64, f64, usize, DriverOptions<T>) -> EigenResult<T>;
type BandedEntry<T> =
    fn(&BandedMatrix<T>, Option<&BandedMatrix<T>>, &FeastParams, f64, f64, usize, DriverOptions<T>) -> EigenResult<T>;

struct Entry<T> {
    csr: CsrEntry<T>,
    dense: DenseEntry<T>,
    banded: BandedEntry<T>,
}

fn load_and_solve<T: Scalar>(
    flags: &DriverFlags,
    config: &DriverConfig,
    report: SharedWriter,
    entry: Entry<T>,
) -> Result<EigenResult<T>, DriverError> {
    let a = load_matrix::<T>(with_extension(&flags.prefix, "A"), config.uplo)?;
    let b = match config.problem {
        ProblemKind::Standard => None,
        ProblemKind::Generalized => Some(load_matrix::<T>(with_extension(&flags.prefix, "B"), config.uplo)?),
    };
    if let Some(b) = &b {
        if b.n != a.n {
            return Err(DriverError::Usage(format!("B is {0}x{0} but A is {1}x{1}", b.n, a.n)));
        }
    }
    Ok(solve(flags, config, a, b, report, entry))
}

/// Numeric summary of a finished run (everything but the timing line).
pub fn summary<T>(config: &DriverConfig, r: &EigenResult<T>) -> String {
    let mut s = String::new();
    let trace: f64 = r.eigenvalues().iter().sum();
    s.push_str(&format!(" FEAST OUTPUT INFO {}\n", r.info.value()));
    s.push_str(" *************************************************\n");
    s.push_str(" ************** REPORT ***************************\n");
    s.push_str(" *************************************************\n");
    s.push_str(&format!(" # Search interval [Emin,Emax] {} {}\n", sci(config.emin), sci(config.emax)));
    s.push_str(&format!(" # mode found/subspace {} {}\n", r.m, r.m0));
    s.push_str(&format!(" # iterations {}\n", r.loops));
    s.push_str(&format!(" TRACE {}\n", sci(trace)));
    s.push_str(&format!(" Relative error on the Trace {}\n", sci(r.epsout)));
    s.push_str(" Eigenvalues/Residuals\n");
    for (k, (e, res)) in r.eigenvalues().iter().zip(r.residuals()).enumerate() {
        s.push_str(&format!(" {:>5} {} {}\n", k + 1, sci(*e), sci(*res)));
    }
    s
}

/// Runs the driver, printing the report and summary to `out` and
/// diagnostics to `err`. Returns the process exit code: 0 for success or a
/// warning, 1 for an error `info`, 2 when the inputs cannot be used.
pub fn run_driver<W, E>(flags: &DriverFlags, out: W, mut err: E) -> i32
where
    W: Write + Send + 'static,
    E: Write,
{
    let start = Instant::now();
    let out = SharedWriter(Arc::new(Mutex::new(Box::new(out))));
    let mut printer = out.clone();

    let config = match read(with_extension(&flags.prefix, "in")).and_then(|(path, text)| {
        parse_config(&text).map_err(|source| DriverError::Format { path, source })
    }) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    if flags.solver == SolverKind::Iterative && flags.format != Format::Sparse {
        let _ = writeln!(err, "error: --solver iterative requires --format sparse");
        return 2;
    }
    if flags.parallel_contour == 0 {
        let _ = writeln!(err, "error: --parallel-contour must be at least 1");
        return 2;
    }

    // Problems visible without the matrices; the rest is checked by the solver.
    let early = if config.m0 <= 0 {
        InfoCode::BAD_M0
    } else if !(config.emin < config.emax) {
        InfoCode::BAD_INTERVAL
    } else {
        InfoCode::SUCCESS
    };
    let outcome: Result<(InfoCode, String), DriverError> = if !early.is_success() {
        Ok((early, String::new()))
    } else if config.is_complex() {
        load_and_solve::<Complex64>(
            flags,
            &config,
            out.clone(),
            Entry { csr: feast_hcsr, dense: feast_he, banded: feast_hb },
        )
        .map(|r| (r.info, summary(&config, &r)))
    } else {
        load_and_solve::<f64>(flags, &config, out.clone(), Entry { csr: feast_scsr, dense: feast_sy, banded: feast_sb })
            .map(|r| (r.info, summary(&config, &r)))
    };

    match outcome {
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
        Ok((info, text)) => match info.classification() {
            Classification::Error => {
                let _ = writeln!(err, "error: FEAST info {}: {}", info.value(), info.description());
                1
            }
            class => {
                let _ = write!(printer, "\n{text}");
                let _ = writeln!(printer, " # wall-clock time {:.6} s", start.elapsed().as_secs_f64());
                let _ = printer.flush();
                if class == Classification::Warning {
                    let _ = writeln!(err, "warning: FEAST info {}: {}", info.value(), info.description());
                }
                0
            }
        },
    }
}
