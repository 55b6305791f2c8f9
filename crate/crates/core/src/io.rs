//! Coordinate-format matrix files and the `.in` driver configuration.

use crate::backend::{CsrMatrix, Uplo};
use crate::params::FeastParams;
use crate::scalar::Scalar;
use num_complex::Complex64;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: entry ({i}, {j}) outside 1..={n}")]
    Range { line: usize, i: usize, j: usize, n: usize },
    #[error("expected {expected} entries, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("entry ({i}, {j}) is not in the '{uplo}' triangle")]
    Triangle { i: usize, j: usize, uplo: char },
    #[error("missing header line")]
    MissingHeader,
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

/// Accepts Fortran `d` exponents as well (`5.0d0`).
fn parse_real(tok: &str, line: usize) -> Result<f64, IoError> {
    tok.replace(['d', 'D'], "e").parse::<f64>().map_err(|_| parse_err(line, format!("invalid number '{tok}'")))
}

fn parse_index(tok: &str, line: usize) -> Result<usize, IoError> {
    tok.parse::<usize>().map_err(|_| parse_err(line, format!("invalid index '{tok}'")))
}

/// One-based triplets as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix<T> {
    pub n: usize,
    pub triplets: Vec<(usize, usize, T)>,
}

impl<T: Scalar> CooMatrix<T> {
    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }
}

/// Reads `N N NNZ` followed by `i j value` lines (`i j re im` for complex
/// scalars). Duplicates are kept; text after `NNZ` entries is ignored.
pub fn parse_coordinate<T: Scalar>(text: &str) -> Result<CooMatrix<T>, IoError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(IoError::MissingHeader)?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() < 3 {
        return Err(parse_err(hline, "header must hold N N NNZ"));
    }
    let (rows, cols, nnz) = (parse_index(h[0], hline)?, parse_index(h[1], hline)?, parse_index(h[2], hline)?);
    if rows != cols {
        return Err(parse_err(hline, format!("matrix must be square, got {rows} x {cols}")));
    }
    let n = rows;
    let width = if T::IS_COMPLEX { 4 } else { 3 };
    let mut triplets = Vec::with_capacity(nnz);
    for (line, text) in lines.take(nnz) {
        let tok: Vec<&str> = text.split_whitespace().collect();
        if tok.len() < width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", tok.len())));
        }
        let (i, j) = (parse_index(tok[0], line)?, parse_index(tok[1], line)?);
        if i == 0 || j == 0 || i > n || j > n {
            return Err(IoError::Range { line, i, j, n });
        }
        let re = parse_real(tok[2], line)?;
        let im = if T::IS_COMPLEX { parse_real(tok[3], line)? } else { 0.0 };
        triplets.push((i, j, T::from_complex(Complex64::new(re, im))));
    }
    if triplets.len() < nnz {
        return Err(IoError::Truncated { expected: nnz, found: triplets.len() });
    }
    Ok(CooMatrix { n, triplets })
}

/// Inverse of [`parse_coordinate`]; values are written in shortest
/// round-trip form.
pub fn write_coordinate<T: Scalar>(coo: &CooMatrix<T>) -> String {
    let mut s = format!("{} {} {}\n", coo.n, coo.n, coo.nnz());
    for &(i, j, v) in &coo.triplets {
        if T::IS_COMPLEX {
            let _ = writeln!(s, "{i} {j} {:e} {:e}", v.re(), v.im());
        } else {
            let _ = writeln!(s, "{i} {j} {:e}", v.re());
        }
    }
    s
}

/// Sorted, duplicate-summed CSR. With `Lower`/`Upper` every triplet must
/// lie in that triangle.
pub fn coo_to_csr<T: Scalar>(coo: &CooMatrix<T>, uplo: Uplo) -> Result<CsrMatrix<T>, IoError> {
    let mut t = coo.triplets.clone();
    if let Some(&(i, j, _)) = t.iter().find(|&&(i, j, _)| !uplo.stores(i, j)) {
        return Err(IoError::Triangle { i, j, uplo: uplo.as_char() });
    }
    t.sort_by_key(|&(i, j, _)| (i, j));
    let mut ia = vec![0usize; coo.n + 1];
    let mut ja: Vec<usize> = Vec::with_capacity(t.len());
    let mut values: Vec<T> = Vec::with_capacity(t.len());
    let mut last = None;
    for (i, j, v) in t {
        if last == Some((i, j)) {
            *values.last_mut().expect("previous entry") += v;
            continue;
        }
        last = Some((i, j));
        ia[i] += 1;
        ja.push(j);
        values.push(v);
    }
    ia[0] = 1;
    for i in 1..=coo.n {
        ia[i] += ia[i - 1];
    }
    Ok(CsrMatrix::new(coo.n, uplo, ia, ja, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Standard,
    Generalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriverConfig {
    pub problem: ProblemKind,
    /// One of `s`, `d`, `c`, `z`.
    pub precision: char,
    pub uplo: Uplo,
    pub emin: f64,
    pub emax: f64,
    /// Kept signed so that a bad value reaches the solver's own check.
    pub m0: i64,
    /// `(slot, value)` pairs in file order.
    pub overrides: Vec<(usize, i32)>,
}

impl DriverConfig {
    pub fn is_complex(&self) -> bool {
        matches!(self.precision, 'c' | 'z')
    }

    /// Defaults with the file's overrides applied.
    pub fn params(&self) -> FeastParams {
        let mut fpm = FeastParams::new();
        for &(slot, value) in &self.overrides {
            fpm.set_slot(slot, value);
        }
        fpm
    }
}

/// Reads the `.in` layout: problem, precision, UPLO, Emin, Emax, M0, then
/// up to five integers for fpm slots 1, 2, 3 (7 for `s`/`c`), 4 and 6.
/// Everything from `!` on is a comment and comment-only lines are skipped.
pub fn parse_config(text: &str) -> Result<DriverConfig, IoError> {
    let mut values = text.lines().enumerate().filter_map(|(k, l)| {
        let tok = l.split('!').next().unwrap_or("").trim();
        (!tok.is_empty()).then(|| (k + 1, tok.split_whitespace().next().unwrap_or("")))
    });
    let mut next = |what: &str| values.next().ok_or_else(|| parse_err(0, format!("missing {what}")));

    let (line, tok) = next("problem type")?;
    let problem = match tok.to_ascii_lowercase().as_str() {
        "s" => ProblemKind::Standard,
        "g" => ProblemKind::Generalized,
        _ => return Err(parse_err(line, format!("problem type must be s or g, got '{tok}'"))),
    };
    let (line, tok) = next("precision")?;
    let precision = match tok.to_ascii_lowercase().as_str() {
        p @ ("s" | "d" | "c" | "z") => p.chars().next().expect("one char"),
        _ => return Err(parse_err(line, format!("precision must be s, d, c or z, got '{tok}'"))),
    };
    let (line, tok) = next("UPLO")?;
    let uplo = match tok.chars().collect::<Vec<_>>().as_slice() {
        [c] => Uplo::from_char(*c),
        _ => None,
    }
    .ok_or_else(|| parse_err(line, format!("UPLO must be F, L or U, got '{tok}'")))?;
    let (line, tok) = next("Emin")?;
    let emin = parse_real(tok, line)?;
    let (line, tok) = next("Emax")?;
    let emax = parse_real(tok, line)?;
    let (line, tok) = next("M0")?;
    let m0 = tok.parse::<i64>().map_err(|_| parse_err(line, format!("invalid M0 '{tok}'")))?;

    let tolerance_slot = if matches!(precision, 's' | 'c') { 7 } else { 3 };
    let mut overrides = Vec::new();
    for slot in [1, 2, tolerance_slot, 4, 6] {
        let Some((line, tok)) = values.next() else { break };
        let v = tok.parse::<i32>().map_err(|_| parse_err(line, format!("invalid integer '{tok}' for fpm({slot})")))?;
        overrides.push((slot, v));
    }
    Ok(DriverConfig { problem, precision, uplo, emin, emax, m0, overrides })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEMPLATE: &str = "s      ! \"s\"tandard or \"g\"eneralized eigenvalue problem
d      !(s,d,c,z)precision i.e (single real,double real,complex,double complex)
F      ! UPLO (matrix elements provided:'F' Full,'L' Lower part,'U' upper part)
-5.0e0 ! Emin (lower bound search interval)
5.0e0  ! Emax (upper bound search interval)
20     ! M0 (size of the subspace)
!!!!FEASTPARAM (1,64) in Fortran; [0,63] in C
1   !feastparam(1)[0] !(0,1)
8   !feastparam(2)[1] !(3,4,5,6,8,10,12,16,20,24,32,40,48)
12  !feastparam(3)[2]
20  !feastparam(4)[3] !maximum #loop
1   !feastparam(6)[5] !(0,1)
";

    fn tridiagonal_triplets(keep: impl Fn(usize, usize) -> bool) -> String {
        let mut t = Vec::new();
        for i in 1..=4usize {
            for j in 1..=4usize {
                let v = match i.abs_diff(j) {
                    0 => 2.0,
                    1 => -1.0,
                    _ => continue,
                };
                if keep(i, j) {
                    t.push(format!("{i} {j} {v}"));
                }
            }
        }
        format!("4 4 {}\n{}\n", t.len(), t.join("\n"))
    }

    #[test]
    fn helloworld_matrix() {
        let coo: CooMatrix<f64> = parse_coordinate("2 2 4\n1 1 2.0\n1 2 -1.0\n2 1 -1.0\n2 2 2.0").unwrap();
        assert_eq!(coo.n, 2);
        assert_eq!(coo.triplets, vec![(1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0)]);
    }

    #[test]
    fn scalar_matrix() {
        let coo: CooMatrix<f64> = parse_coordinate("1 1 1\n1 1 5.0").unwrap();
        assert_eq!(coo.triplets, vec![(1, 1, 5.0)]);
    }

    #[test]
    fn complex_values_take_two_fields() {
        let coo: CooMatrix<Complex64> = parse_coordinate("2 2 1\n2 1 1.5 -0.5\n").unwrap();
        assert_eq!(coo.triplets, vec![(2, 1, Complex64::new(1.5, -0.5))]);
    }

    #[test]
    fn coordinate_errors() {
        let e = parse_coordinate::<f64>("2 2 2\n1 1 2.0\n1 x 1.0\n").unwrap_err();
        assert_eq!(e, IoError::Parse { line: 3, message: "invalid index 'x'".into() });
        assert!(matches!(parse_coordinate::<f64>("2 2 1\n3 1 1.0"), Err(IoError::Range { line: 2, i: 3, .. })));
        assert_eq!(
            parse_coordinate::<f64>("2 2 3\n1 1 1.0\n2 2 1.0"),
            Err(IoError::Truncated { expected: 3, found: 2 })
        );
        assert!(matches!(parse_coordinate::<f64>("2 3 0"), Err(IoError::Parse { line: 1, .. })));
        assert_eq!(parse_coordinate::<f64>("  \n"), Err(IoError::MissingHeader));
    }

    #[test]
    fn full_tridiagonal_to_csr() {
        let coo: CooMatrix<f64> = parse_coordinate(&tridiagonal_triplets(|_, _| true)).unwrap();
        assert_eq!(coo.nnz(), 10);
        let csr = coo_to_csr(&coo, Uplo::Full).unwrap();
        assert_eq!(csr.ia, vec![1, 3, 6, 9, 11]);
        assert_eq!(csr.ja, vec![1, 2, 1, 2, 3, 2, 3, 4, 3, 4]);
    }

    #[test]
    fn lower_tridiagonal_to_csr() {
        let coo: CooMatrix<f64> = parse_coordinate(&tridiagonal_triplets(|i, j| i >= j)).unwrap();
        let csr = coo_to_csr(&coo, Uplo::Lower).unwrap();
        assert_eq!(csr.ia, vec![1, 2, 4, 6, 8]);
        assert_eq!(csr.ja, vec![1, 1, 2, 2, 3, 3, 4]);
        assert_eq!(coo_to_csr(&coo, Uplo::Upper), Err(IoError::Triangle { i: 2, j: 1, uplo: 'U' }));
    }

    #[test]
    fn duplicates_are_summed() {
        let coo = CooMatrix { n: 1, triplets: vec![(1, 1, 1.0), (1, 1, 1.0)] };
        let csr = coo_to_csr(&coo, Uplo::Full).unwrap();
        assert_eq!(csr.values, vec![2.0]);
        assert_eq!(csr.ia, vec![1, 2]);
    }

    #[test]
    fn template_config() {
        let c = parse_config(TEMPLATE).unwrap();
        assert_eq!(c.problem, ProblemKind::Standard);
        assert_eq!(c.precision, 'd');
        assert_eq!(c.uplo, Uplo::Full);
        assert_eq!((c.emin, c.emax, c.m0), (-5.0, 5.0, 20));
        let fpm = c.params();
        assert_eq!([fpm.slot(1), fpm.slot(2), fpm.slot(3), fpm.slot(4), fpm.slot(6)], [1, 8, 12, 20, 1]);
        assert_eq!(fpm.slot(7), 5);
    }

    #[test]
    fn minimal_config_keeps_defaults() {
        let c = parse_config("g\nd\nL\n0.0\n1.0\n8\n").unwrap();
        assert_eq!(c.problem, ProblemKind::Generalized);
        assert_eq!(c.uplo, Uplo::Lower);
        assert_eq!((c.emin, c.emax, c.m0), (0.0, 1.0, 8));
        assert!(c.overrides.is_empty());
        assert_eq!(c.params(), FeastParams::new());
    }

    #[test]
    fn contour_override_line() {
        let text = TEMPLATE.replace("8   !feastparam(2)", "16  !feastparam(2)");
        assert_eq!(parse_config(&text).unwrap().params().slot(2), 16);
    }

    #[test]
    fn single_precision_third_line_sets_slot_seven() {
        let text = TEMPLATE.replacen("d      !", "s      !", 1);
        let fpm = parse_config(&text).unwrap().params();
        assert_eq!(fpm.slot(7), 12);
        assert_eq!(fpm.slot(3), 12);
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let bad = TEMPLATE.replacen("F      !", "X      !", 1);
        assert!(matches!(parse_config(&bad), Err(IoError::Parse { line: 3, .. })));
        let bad = TEMPLATE.replacen("20     !", "lots   !", 1);
        assert!(matches!(parse_config(&bad), Err(IoError::Parse { line: 6, .. })));
        let bad = TEMPLATE.replacen("20  !feast", "2.5 !feast", 1);
        assert!(matches!(parse_config(&bad), Err(IoError::Parse { line: 11, .. })));
    }
}
