//! Gauss-Legendre rules and their mapping onto the upper half-circle over
//! the search interval.

use crate::params::SUPPORTED_CONTOUR_POINTS;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_STEP_TOL: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("unsupported number of contour points: {0}")]
    UnsupportedOrder(usize),
    #[error("invalid interval: emin ({emin}) must be below emax ({emax})")]
    InvalidInterval { emin: f64, emax: f64 },
}

/// Nodes and weights of an `n`-point rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Node/weight pairs in the alternating convention `(x_1, w_1), (-x_1, w_1), ...`
    /// with `x_1` the smallest positive node; the middle node (odd orders) comes last.
    pub fn paired(&self) -> Vec<(f64, f64)> {
        let n = self.order();
        let mut out = Vec::with_capacity(n);
        for k in 0..n / 2 {
            let pos = n - n / 2 + k;
            out.push((self.nodes[pos], self.weights[pos]));
            out.push((-self.nodes[pos], self.weights[pos]));
        }
        if n % 2 == 1 {
            out.push((self.nodes[n / 2], self.weights[n / 2]));
        }
        out
    }

    /// Applies the rule to `f` over `[-1, 1]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule of any order `n >= 1`, by Newton iteration from
/// Chebyshev-angle starting points.
pub fn gauss_legendre_any(n: usize) -> QuadratureRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= NEWTON_STEP_TOL {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

/// Gauss-Legendre rule restricted to the orders accepted in `fpm(2)`.
pub fn gauss_legendre(ne: usize) -> Result<QuadratureRule, QuadratureError> {
    if !SUPPORTED_CONTOUR_POINTS.iter().any(|&v| v as usize == ne) {
        return Err(QuadratureError::UnsupportedOrder(ne));
    }
    Ok(gauss_legendre_any(ne))
}

/// One quadrature point on the half-circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPoint {
    pub node: f64,
    pub weight: f64,
    pub theta: f64,
    /// The complex shift `Z_e`.
    pub z: Complex64,
}

/// Quadrature points mapped onto the half-circle of center `(emin+emax)/2`
/// and radius `(emax-emin)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub center: f64,
    pub radius: f64,
    pub points: Vec<ContourPoint>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Value at real `lambda` of the rational filter applied by the
    /// symmetric accumulation: `sum_e -(w_e/2) Re{ r e^{i theta_e} / (z_e - lambda) }`.
    pub fn filter_value(&self, lambda: f64) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let jac = Complex64::from_polar(self.radius, p.theta);
                -(p.weight / 2.0) * (jac / (p.z - lambda)).re
            })
            .sum()
    }
}

/// Maps `rule` onto the half-circle over `[emin, emax]`, keeping node order.
pub fn build_contour(rule: &QuadratureRule, emin: f64, emax: f64) -> Result<Contour, QuadratureError> {
    if !(emin < emax) {
        return Err(QuadratureError::InvalidInterval { emin, emax });
    }
    let radius = (emax - emin) / 2.0;
    let center = (emax + emin) / 2.0;
    let points = rule
        .iter()
        .map(|(x, w)| {
            let theta = -(PI / 2.0) * (x - 1.0);
            ContourPoint { node: x, weight: w, theta, z: center + Complex64::from_polar(radius, theta) }
        })
        .collect();
    Ok(Contour { center, radius, points })
}
