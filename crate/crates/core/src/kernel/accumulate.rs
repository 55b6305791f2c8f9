use crate::scalar::Scalar;
use num_complex::Complex64;

/// Which quadrature term a block of solutions contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accumulation {
    /// `Q -= (w/2) Re{ r e^{i theta} Q_e }`
    Symmetric,
    /// `Q -= (w/4) r e^{i theta} Q_e`
    HermitianDirect,
    /// `Q -= (w/4) r e^{-i theta} Qhat_e`
    HermitianAdjoint,
}

/// Adds one contour point's contribution to the accumulated subspace `q`.
///
/// Panics when the block shapes differ.
pub fn accumulate_subspace<T: Scalar>(
    q: &mut [T],
    work2: &[Complex64],
    weight: f64,
    radius: f64,
    theta: f64,
    variant: Accumulation,
) {
    assert_eq!(q.len(), work2.len(), "subspace and solution blocks differ in shape");
    let coef = match variant {
        Accumulation::Symmetric => Complex64::from_polar(radius * weight / 2.0, theta),
        Accumulation::HermitianDirect => Complex64::from_polar(radius * weight / 4.0, theta),
        Accumulation::HermitianAdjoint => Complex64::from_polar(radius * weight / 4.0, -theta),
    };
    debug_assert!(T::IS_COMPLEX || variant == Accumulation::Symmetric);
    match variant {
        Accumulation::Symmetric => {
            for (qi, &wi) in q.iter_mut().zip(work2) {
                *qi -= T::from_real((coef * wi).re);
            }
        }
        _ => {
            for (qi, &wi) in q.iter_mut().zip(work2) {
                *qi -= T::from_complex(coef * wi);
            }
        }
    }
}
