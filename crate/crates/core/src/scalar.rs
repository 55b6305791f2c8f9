//! Field abstraction shared by the symmetric (`f64`) and Hermitian
//! (`Complex64`) code paths.

use num_complex::Complex64;
use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + Debug
    + Default
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    const IS_COMPLEX: bool;
    /// LAPACK-style precision letter: `D` or `Z`.
    const PREFIX: char;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    fn abs_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn to_complex(self) -> Complex64;
    /// Narrows a complex value into this field; the real field keeps the real part.
    fn from_complex(z: Complex64) -> Self;
    /// Unit-modulus factor `x / |x|`, or one for zero.
    fn phase(self) -> Self;
    fn is_finite(self) -> bool;
    /// Builds a value from two uniform samples in `[-1, 1)`; the real field
    /// uses only the first.
    fn from_uniform_pair(a: f64, b: f64) -> Self;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    const PREFIX: char = 'D';

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
    fn phase(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn from_uniform_pair(a: f64, _b: f64) -> Self {
        a
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;
    const PREFIX: char = 'Z';

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn phase(self) -> Self {
        let m = self.norm();
        if m == 0.0 {
            Self::one()
        } else {
            self / m
        }
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn from_uniform_pair(a: f64, b: f64) -> Self {
        Complex64::new(a, b)
    }
}

/// Sum of moduli.
pub fn norm1<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.modulus()).sum()
}

/// `sum conj(x_i) y_i`.
pub fn dot_conj<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a.conj() * b).sum()
}
