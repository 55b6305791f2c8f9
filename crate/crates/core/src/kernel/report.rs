use crate::params::{FeastParams, InfoCode};
use std::io::Write;

const RULE: &str = "***********************************************";

/// Fortran-like scientific notation: `4.000000000000001e+00`.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.15e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("numeric exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub(crate) struct Reporter {
    sink: Box<dyn Write + Send>,
}

impl Reporter {
    pub(crate) fn new(sink: Box<dyn Write + Send>) -> Self {
        Self { sink }
    }

    // Report lines are best effort; a broken sink must not abort the solve.
    fn line(&mut self, text: &str) {
        let _ = writeln!(self.sink, "{text}");
    }

    pub(crate) fn begin(&mut self, routine: &str, fpm: &FeastParams, emin: f64, emax: f64, m0: usize) {
        self.line(RULE);
        self.line("*********** FEAST- BEGIN **********************");
        self.line(RULE);
        self.line(&format!("Routine {routine}"));
        let changed = fpm.non_default();
        if !changed.is_empty() {
            self.line("List of input parameters fpm(1:64)-- if different from default");
            for (slot, value) in changed {
                self.line(&format!("   fpm({slot})={value}"));
            }
        }
        self.line(&format!("Search interval [{}; {}]", sci(emin), sci(emax)));
        self.line(&format!("Size subspace   {m0}"));
        self.line("#Loop | #Eig |     Trace           |    Error-Trace       |   Max-Residual");
    }

    pub(crate) fn iteration(&mut self, loop_index: usize, m: usize, trace: f64, epsout: f64, max_res: f64) {
        self.line(&format!("{:<8}{:<7}{}  {}  {}", loop_index, m, sci(trace), sci(epsout), sci(max_res)));
    }

    pub(crate) fn shrink(&mut self, m0: usize) {
        self.line(&format!("Size subspace reduced to {m0}"));
    }

    pub(crate) fn end(&mut self, info: InfoCode) {
        match info.value() {
            0 => self.line("==>FEAST has successfully converged (to desired tolerance)"),
            1..=4 => self.line(&format!("==>WARNING {}: {}", info.value(), info.description())),
            _ => self.line(&format!("==>ERROR {}: {}", info.value(), info.description())),
        }
        self.line(RULE);
        self.line("*********** FEAST- END*************************");
        self.line(RULE);
        let _ = self.sink.flush();
    }
}
