//! The 64-slot integer control vector and the `info` return-code vocabulary.
//!
//! Slots are addressed 1-based through [`FeastParams::slot`], matching the
//! Fortran convention `fpm(i)`. [`FeastParams::get`] is the zero-based view
//! (`fpm[j] == fpm(j + 1)`).

use std::fmt;

/// Number of slots in the control vector.
pub const FPM_LEN: usize = 64;

/// Contour orders accepted in slot 2.
pub const SUPPORTED_CONTOUR_POINTS: [i32; 13] = [3, 4, 5, 6, 8, 10, 12, 16, 20, 24, 32, 40, 48];

/// Largest exponent honoured by slot 3 (double precision tolerance).
pub const MAX_DOUBLE_EXPONENT: i32 = 16;
/// Largest exponent honoured by slot 7 (single precision tolerance).
pub const MAX_SINGLE_EXPONENT: i32 = 8;

const DEFAULTS: [(usize, i32); 8] = [(1, 0), (2, 8), (3, 12), (4, 20), (5, 0), (6, 0), (7, 5), (14, 0)];

/// Integer control vector with FEASTINIT defaults.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct FeastParams {
    slots: [i32; FPM_LEN],
}

impl FeastParams {
    /// Returns the default parameter set.
    pub fn new() -> Self {
        let mut slots = [0; FPM_LEN];
        for (slot, value) in DEFAULTS {
            slots[slot - 1] = value;
        }
        Self { slots }
    }

    /// Value of `fpm(i)`, 1-based.
    ///
    /// Panics if `i` is outside `1..=64`.
    pub fn slot(&self, i: usize) -> i32 {
        assert!((1..=FPM_LEN).contains(&i), "fpm slot {i} out of range");
        self.slots[i - 1]
    }

    pub fn set_slot(&mut self, i: usize, value: i32) -> &mut Self {
        assert!((1..=FPM_LEN).contains(&i), "fpm slot {i} out of range");
        self.slots[i - 1] = value;
        self
    }

    /// Zero-based accessor: `get(j) == slot(j + 1)`.
    pub fn get(&self, j: usize) -> i32 {
        self.slots[j]
    }

    pub fn set(&mut self, j: usize, value: i32) -> &mut Self {
        self.slots[j] = value;
        self
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.slots
    }

    /// Builder-style slot override.
    pub fn with(mut self, i: usize, value: i32) -> Self {
        self.set_slot(i, value);
        self
    }

    pub fn print_runtime(&self) -> bool {
        self.slot(1) == 1
    }

    pub fn contour_points(&self) -> usize {
        self.slot(2) as usize
    }

    /// Stopping tolerance `10^-fpm(3)`, exponent clamped to [`MAX_DOUBLE_EXPONENT`].
    pub fn tolerance(&self) -> f64 {
        10f64.powi(-self.slot(3).min(MAX_DOUBLE_EXPONENT))
    }

    /// Single precision tolerance `10^-fpm(7)`, exponent clamped to [`MAX_SINGLE_EXPONENT`].
    pub fn single_tolerance(&self) -> f64 {
        10f64.powi(-self.slot(7).min(MAX_SINGLE_EXPONENT))
    }

    pub fn max_loops(&self) -> usize {
        self.slot(4).max(0) as usize
    }

    pub fn initial_guess(&self) -> bool {
        self.slot(5) == 1
    }

    pub fn residual_criterion(&self) -> bool {
        self.slot(6) == 1
    }

    pub fn subspace_only(&self) -> bool {
        self.slot(14) == 1
    }

    /// Slots whose value differs from the defaults, as `(slot, value)` pairs.
    /// The kernel-owned slots 24 and 25 are never listed.
    pub fn non_default(&self) -> Vec<(usize, i32)> {
        let defaults = Self::new();
        (1..=FPM_LEN)
            .filter(|&i| i != 24 && i != 25)
            .filter(|&i| self.slot(i) != defaults.slot(i))
            .map(|i| (i, self.slot(i)))
            .collect()
    }

    /// Checks every constrained slot and returns `100 + i` for the smallest
    /// offending slot `i`, or success.
    ///
    /// Exponents above the caps of slots 3 and 7 are accepted (they are
    /// clamped when read); only values below 1 are rejected.
    pub fn validate(&self) -> InfoCode {
        let checks: [(usize, fn(i32) -> bool); 8] = [
            (1, |v| v == 0 || v == 1),
            (2, |v| SUPPORTED_CONTOUR_POINTS.contains(&v)),
            (3, |v| v >= 1),
            (4, |v| v >= 0),
            (5, |v| v == 0 || v == 1),
            (6, |v| v == 0 || v == 1),
            (7, |v| v >= 1),
            (14, |v| v == 0 || v == 1),
        ];
        for (slot, ok) in checks {
            if !ok(self.slot(slot)) {
                return InfoCode::parameter(slot);
            }
        }
        InfoCode::SUCCESS
    }
}

impl Default for FeastParams {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for FeastParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.non_default()).finish()
    }
}

/// FEASTINIT: the default control vector.
pub fn feastinit() -> FeastParams {
    FeastParams::new()
}

/// Size and interval checks, in the fixed precedence N, M0, interval.
pub fn check_problem(n: i64, m0: i64, emin: f64, emax: f64) -> InfoCode {
    if n <= 0 {
        InfoCode::BAD_N
    } else if m0 > n || m0 <= 0 {
        InfoCode::BAD_M0
    } else if !(emin < emax) {
        InfoCode::BAD_INTERVAL
    } else {
        InfoCode::SUCCESS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Success,
    Warning,
    Error,
}

/// The `info` value returned by every solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InfoCode(pub i32);

impl InfoCode {
    pub const SUCCESS: InfoCode = InfoCode(0);
    pub const NO_EIGENVALUE: InfoCode = InfoCode(1);
    pub const NO_CONVERGENCE: InfoCode = InfoCode(2);
    pub const SUBSPACE_TOO_SMALL: InfoCode = InfoCode(3);
    pub const SUBSPACE_ONLY: InfoCode = InfoCode(4);
    pub const ALLOCATION: InfoCode = InfoCode(-1);
    pub const INNER_SOLVER: InfoCode = InfoCode(-2);
    pub const REDUCED_SOLVER: InfoCode = InfoCode(-3);
    pub const BAD_INTERVAL: InfoCode = InfoCode(200);
    pub const BAD_M0: InfoCode = InfoCode(201);
    pub const BAD_N: InfoCode = InfoCode(202);

    /// `100 + i`: problem with `fpm(i)`.
    pub const fn parameter(slot: usize) -> InfoCode {
        InfoCode(100 + slot as i32)
    }

    /// `-(100 + i)`: problem with the i-th argument of a driver.
    pub const fn argument(position: usize) -> InfoCode {
        InfoCode(-(100 + position as i32))
    }

    pub fn value(self) -> i32 {
        self.0
    }

    pub fn is_success(self) -> bool {
        self.0 == 0
    }

    pub fn classification(self) -> Classification {
        match self.0 {
            0 => Classification::Success,
            1..=4 => Classification::Warning,
            _ => Classification::Error,
        }
    }

    pub fn is_error(self) -> bool {
        self.classification() == Classification::Error
    }

    pub fn description(self) -> String {
        match self.0 {
            202 => "Problem with size of the system N (N<=0)".into(),
            201 => "Problem with size of subspace M0 (M0>N or M0<=0)".into(),
            200 => "Problem with Emin,Emax (Emin>=Emax)".into(),
            4 => "Only the subspace has been returned using fpm(14)=1".into(),
            3 => "Size of the subspace M0 is too small (M0<=M)".into(),
            2 => "No Convergence (#iteration loops>fpm(4))".into(),
            1 => "No Eigenvalue found in the search interval".into(),
            0 => "Successful exit".into(),
            -1 => "Internal error for allocation memory".into(),
            -2 => "Internal error of the inner system solver".into(),
            -3 => "Internal error of the reduced eigenvalue solver (matrix B may not be positive definite)"
                .into(),
            v if (101..200).contains(&v) => {
                format!("Problem with {}th value of the input FEAST parameter (fpm({}))", v - 100, v - 100)
            }
            v if (-199..=-101).contains(&v) => {
                format!("Problem with the {}th argument of the FEAST interface", -v - 100)
            }
            v => format!("Unknown info code {v}"),
        }
    }
}

impl fmt::Display for InfoCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.description())
    }
}
