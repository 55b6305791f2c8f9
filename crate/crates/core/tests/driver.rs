use feast::cli::{run_driver, DriverFlags, Format, SolverKind};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, Mutex};

#[derive(Clone, Default)]
struct Buffer(Arc<Mutex<Vec<u8>>>);

impl Write for Buffer {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

impl Buffer {
    fn text(&self) -> String {
        String::from_utf8(self.0.lock().unwrap().clone()).unwrap()
    }
}

fn config(problem: &str, precision: &str, uplo: &str, emin: &str, emax: &str, m0: &str) -> String {
    format!(
        "{problem}      ! problem\n{precision}      ! precision\n{uplo}      ! UPLO\n{emin} ! Emin\n{emax} ! Emax\n{m0}      ! M0\n"
    )
}

fn helloworld(dir: &Path, m0: &str) -> PathBuf {
    let prefix = dir.join("helloworld");
    fs::write(prefix.with_extension("in"), config("s", "d", "F", "-5.0e0", "5.0e0", m0)).unwrap();
    fs::write(prefix.with_extension("A"), "2 2 4\n1 1 2.0\n1 2 -1.0\n2 1 -1.0\n2 2 2.0\n").unwrap();
    prefix
}

fn run(flags: &DriverFlags) -> (i32, String, String) {
    let (out, err) = (Buffer::default(), Buffer::default());
    let mut err_writer = err.clone();
    let code = run_driver(flags, out.clone(), &mut err_writer);
    (code, out.text(), err.text())
}

fn without_timing(text: &str) -> String {
    text.lines().filter(|l| !l.contains("wall-clock")).collect::<Vec<_>>().join("\n")
}

fn eigenvalue_lines(text: &str) -> Vec<f64> {
    let start = text.lines().position(|l| l.contains("Eigenvalues/Residuals")).expect("eigenvalue table");
    text.lines()
        .skip(start + 1)
        .map_while(|l| {
            let cols: Vec<&str> = l.split_whitespace().collect();
            (cols.len() >= 3 && cols[0].parse::<usize>().is_ok()).then(|| cols[1].parse::<f64>().unwrap())
        })
        .collect()
}

#[test]
fn helloworld_summary_for_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = helloworld(dir.path(), "2");
    for format in [Format::Sparse, Format::Dense, Format::Banded] {
        let flags = DriverFlags { format, ..DriverFlags::new(&prefix) };
        let (code, out, err) = run(&flags);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains(" FEAST OUTPUT INFO 0"));
        assert!(out.contains("mode found/subspace 2 2"), "{out}");
        let e = eigenvalue_lines(&out);
        assert_eq!(e.len(), 2);
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
    }
}

#[test]
fn iterative_inner_solver_through_the_driver() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = helloworld(dir.path(), "2");
    let flags = DriverFlags { solver: SolverKind::Iterative, iter_tol: 1e-12, ..DriverFlags::new(&prefix) };
    let (code, out, _) = run(&flags);
    assert_eq!(code, 0);
    let e = eigenvalue_lines(&out);
    assert!((e[0] - 1.0).abs() < 1e-10 && (e[1] - 3.0).abs() < 1e-10);

    let dense = DriverFlags { format: Format::Dense, ..flags };
    let (code, _, err) = run(&dense);
    assert_eq!(code, 2);
    assert!(err.contains("iterative"));
}

#[test]
fn reversed_interval_exits_with_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = helloworld(dir.path(), "2");
    fs::write(prefix.with_extension("in"), config("s", "d", "F", "5.0", "-5.0", "2")).unwrap();
    let (code, out, err) = run(&DriverFlags::new(&prefix));
    assert_eq!(code, 1);
    assert!(err.contains("Emin>=Emax"), "{err}");
    assert!(err.contains("200"));
    assert!(!out.contains("Eigenvalues"));
}

#[test]
fn bad_subspace_size_is_reported_before_reading_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("nomatrix");
    fs::write(prefix.with_extension("in"), config("s", "d", "F", "-5", "5", "0")).unwrap();
    let (code, _, err) = run(&DriverFlags::new(&prefix));
    assert_eq!(code, 1);
    assert!(err.contains("201"), "{err}");
}

#[test]
fn missing_files_exit_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("absent");
    let (code, _, err) = run(&DriverFlags::new(&prefix));
    assert_eq!(code, 2);
    assert!(err.contains("absent.in"), "{err}");

    let prefix = helloworld(dir.path(), "2");
    fs::write(prefix.with_extension("in"), config("g", "d", "F", "-5", "5", "2")).unwrap();
    let (code, _, err) = run(&DriverFlags::new(&prefix));
    assert_eq!(code, 2);
    assert!(err.contains("helloworld.B"), "{err}");
}

#[test]
fn malformed_inputs_exit_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = helloworld(dir.path(), "2");
    fs::write(prefix.with_extension("A"), "2 2 1\n3 1 1.0\n").unwrap();
    let (code, _, err) = run(&DriverFlags::new(&prefix));
    assert_eq!(code, 2, "{err}");

    fs::write(prefix.with_extension("A"), "2 2 4\n1 1 2.0\n1 2 -1.0\n").unwrap();
    let (code, _, _) = run(&DriverFlags::new(&prefix));
    assert_eq!(code, 2);

    fs::write(prefix.with_extension("in"), config("x", "d", "F", "-5", "5", "2")).unwrap();
    let (code, _, _) = run(&DriverFlags::new(&prefix));
    assert_eq!(code, 2);
}

#[test]
fn same_seed_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("lap");
    let n = 40;
    let mut a = format!("{n} {n} {}\n", 2 * n - 1);
    for i in 1..=n {
        a.push_str(&format!("{i} {i} 2.0\n"));
        if i < n {
            a.push_str(&format!("{} {i} -1.0\n", i + 1));
        }
    }
    fs::write(prefix.with_extension("A"), a).unwrap();
    fs::write(prefix.with_extension("in"), config("s", "d", "L", "0.0", "0.5", "10")).unwrap();
    let flags = DriverFlags { seed: 42, ..DriverFlags::new(&prefix) };
    let (c1, o1, _) = run(&flags);
    let (c2, o2, _) = run(&flags);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(without_timing(&o1), without_timing(&o2));
    let parallel = DriverFlags { parallel_contour: 4, ..flags };
    let (_, o3, _) = run(&parallel);
    assert_eq!(without_timing(&o1), without_timing(&o3));
}

#[test]
fn complex_generalized_problem() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("herm");
    // A = [[2, i], [-i, 2]] has eigenvalues 1 and 3; B = 2 I halves them.
    fs::write(prefix.with_extension("A"), "2 2 3\n1 1 2.0 0.0\n2 1 0.0 -1.0\n2 2 2.0 0.0\n").unwrap();
    fs::write(prefix.with_extension("B"), "2 2 2\n1 1 2.0 0.0\n2 2 2.0 0.0\n").unwrap();
    fs::write(prefix.with_extension("in"), config("g", "z", "L", "0.0", "2.0", "2")).unwrap();
    let (code, out, err) = run(&DriverFlags::new(&prefix));
    assert_eq!(code, 0, "{err}");
    let e = eigenvalue_lines(&out);
    assert!((e[0] - 0.5).abs() < 1e-12 && (e[1] - 1.5).abs() < 1e-12, "{out}");
}

#[test]
fn warnings_still_exit_successfully() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = helloworld(dir.path(), "2");
    fs::write(prefix.with_extension("in"), config("s", "d", "F", "10.0", "20.0", "2")).unwrap();
    let (code, out, err) = run(&DriverFlags::new(&prefix));
    assert_eq!(code, 0);
    assert!(out.contains(" FEAST OUTPUT INFO 1"));
    assert!(err.contains("warning"));
}

#[test]
fn binary_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = helloworld(dir.path(), "2");
    let exe = env!("CARGO_BIN_EXE_feast-driver");
    let ok = Command::new(exe).arg(&prefix).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("mode found/subspace 2 2"));

    let missing = Command::new(exe).arg(dir.path().join("nothing")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    fs::write(prefix.with_extension("in"), config("s", "d", "F", "5.0", "-5.0", "2")).unwrap();
    let reversed = Command::new(exe).arg(&prefix).output().unwrap();
    assert_eq!(reversed.status.code(), Some(1));

    let bad_flag = Command::new(exe).arg(&prefix).arg("--format").arg("csc").output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));
}
