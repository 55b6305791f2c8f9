//! Residuals, trace error and the final ordering of Ritz pairs.

use crate::linalg::Mat;
use crate::scalar::{norm1, Scalar};

/// Residual value marking a spurious pair.
pub const SPURIOUS: f64 = -1.0;

/// `|trace_cur - trace_prev| / max(|emin|, |emax|)`, or `1.0` when there is
/// no previous trace yet.
pub fn trace_error(trace_cur: f64, trace_prev: Option<f64>, emin: f64, emax: f64) -> f64 {
    match trace_prev {
        None => 1.0,
        Some(prev) => (trace_cur - prev).abs() / emin.abs().max(emax.abs()),
    }
}

/// `||A x - lambda B x||_1 / ||max(|emin|,|emax|) B x||_1` given `A x` and
/// `B x`. A zero denominator yields `+inf`.
pub fn relative_residual<T: Scalar>(ax: &[T], bx: &[T], lambda: f64, emin: f64, emax: f64) -> f64 {
    let num: f64 = ax.iter().zip(bx).map(|(&a, &b)| (a - b.scale(lambda)).modulus()).sum();
    let den = emin.abs().max(emax.abs()) * norm1(bx);
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Residual through operator closures; `b_apply = None` means `B = I`.
pub fn residual<T: Scalar>(
    a_apply: impl Fn(&[T]) -> Vec<T>,
    b_apply: Option<&dyn Fn(&[T]) -> Vec<T>>,
    lambda: f64,
    x: &[T],
    emin: f64,
    emax: f64,
) -> f64 {
    let ax = a_apply(x);
    let bx = match b_apply {
        Some(b) => b(x),
        None => x.to_vec(),
    };
    relative_residual(&ax, &bx, lambda, emin, emax)
}

/// Marks in-interval pairs whose residual is an outlier: above
/// `max(100 * median, floor)` over the in-interval residuals, or not finite.
/// Marked entries get [`SPURIOUS`] as residual. Returns the number marked.
pub fn flag_spurious(e: &[f64], res: &mut [f64], emin: f64, emax: f64, floor: f64) -> usize {
    let inside: Vec<usize> = (0..e.len()).filter(|&j| e[j] >= emin && e[j] <= emax && res[j] >= 0.0).collect();
    if inside.is_empty() {
        return 0;
    }
    let mut sorted: Vec<f64> = inside.iter().map(|&j| res[j]).filter(|r| r.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() {
        f64::INFINITY
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let limit = (100.0 * median).max(floor);
    let mut count = 0;
    for j in inside {
        if !res[j].is_finite() || res[j] > limit {
            res[j] = SPURIOUS;
            count += 1;
        }
    }
    count
}

/// Reorders eigenvalues, vectors and residuals so that the in-interval,
/// non-spurious pairs come first in ascending order, followed by the
/// out-of-interval pairs in their incoming order, then the spurious pairs
/// (residual [`SPURIOUS`]). Only the first `e.len()` columns of `x` take part.
/// Returns the in-interval count.
pub fn filter_sort_flag<T: Scalar>(e: &mut [f64], x: &mut Mat<T>, res: &mut [f64], emin: f64, emax: f64) -> usize {
    let k = e.len();
    assert_eq!(res.len(), k);
    assert!(x.ncols() >= k);
    let is_spurious = |j: usize| res[j] == SPURIOUS;
    let inside = |j: usize| e[j] >= emin && e[j] <= emax;

    let mut first: Vec<usize> = (0..k).filter(|&j| !is_spurious(j) && inside(j)).collect();
    first.sort_by(|&a, &b| e[a].total_cmp(&e[b]));
    let m = first.len();
    let order: Vec<usize> = first
        .into_iter()
        .chain((0..k).filter(|&j| !is_spurious(j) && !inside(j)))
        .chain((0..k).filter(|&j| is_spurious(j)))
        .collect();

    let e_old = e.to_vec();
    let res_old = res.to_vec();
    let x_old: Vec<Vec<T>> = (0..k).map(|j| x.col(j).to_vec()).collect();
    for (dst, &src) in order.iter().enumerate() {
        e[dst] = e_old[src];
        res[dst] = res_old[src];
        x.col_mut(dst).copy_from_slice(&x_old[src]);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_error_examples() {
        let eps = trace_error(4.0, Some(4.000000000000001), -5.0, 5.0);
        assert!((eps - 1.7763568394002505e-16).abs() < 1e-30, "{eps}");
        assert_eq!(trace_error(4.0, Some(4.0), -5.0, 5.0), 0.0);
        assert_eq!(trace_error(4.0, None, -5.0, 5.0), 1.0);
    }

    #[test]
    fn sort_two_inside() {
        let mut e = vec![3.0, 1.0];
        let mut x = Mat::from_col_major(2, 2, vec![0.0, 3.0, 1.0, 0.0]);
        let mut res = vec![0.0, 0.0];
        let m = filter_sort_flag(&mut e, &mut x, &mut res, -5.0, 5.0);
        assert_eq!(m, 2);
        assert_eq!(e, vec![1.0, 3.0]);
        assert_eq!(x.col(0), &[1.0, 0.0]);
    }

    #[test]
    fn outside_only() {
        let mut e = vec![7.0];
        let mut x = Mat::<f64>::zeros(1, 1);
        let mut res = vec![0.0];
        assert_eq!(filter_sort_flag(&mut e, &mut x, &mut res, -5.0, 5.0), 0);
    }

    #[test]
    fn spurious_goes_last() {
        let mut e = vec![1.0, 2.0, 9.0];
        let mut x = Mat::from_col_major(1, 3, vec![10.0, 20.0, 90.0]);
        let mut res = vec![1e-14, SPURIOUS, 1e-3];
        let m = filter_sort_flag(&mut e, &mut x, &mut res, 0.0, 5.0);
        assert_eq!(m, 1);
        assert_eq!(e, vec![1.0, 9.0, 2.0]);
        assert_eq!(res, vec![1e-14, 1e-3, SPURIOUS]);
        assert_eq!(x.as_slice(), &[10.0, 90.0, 20.0]);
    }

    #[test]
    fn closed_interval_bounds() {
        let mut e = vec![5.0, 0.0];
        let mut x = Mat::<f64>::zeros(1, 2);
        let mut res = vec![0.0, 0.0];
        assert_eq!(filter_sort_flag(&mut e, &mut x, &mut res, 0.0, 5.0), 2);
    }

    #[test]
    fn exact_pair_has_zero_residual() {
        let a = |x: &[f64]| vec![2.0 * x[0] - x[1], -x[0] + 2.0 * x[1]];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = residual(a, None, 3.0, &[h, -h], -5.0, 5.0);
        assert!(r < 1e-14);
        assert_eq!(relative_residual(&[1.0], &[0.0], 1.0, -1.0, 1.0), f64::INFINITY);
    }

    /// Perturbing an exact eigenvector of diag(1,2,3) by t*d gives a residual
    /// that is linear in t to first order.
    #[test]
    fn residual_grows_linearly_with_perturbation() {
        let diag = [1.0, 2.0, 3.0];
        let a = |x: &[f64]| x.iter().zip(diag).map(|(v, d)| v * d).collect::<Vec<_>>();
        let d = [0.3, -0.7, 0.5];
        let at = |t: f64| {
            let x = [t * d[0], 1.0 + t * d[1], t * d[2]];
            residual(a, None, 2.0, &x, 0.0, 4.0)
        };
        // first-order expansion: |A d - 2 d|_1 / (4 * |e2|_1) = (0.3 + 0.5) / 4
        let slope = (0.3 * 1.0 + 0.5 * 1.0) / 4.0;
        for t in [1e-4, 1e-5, 1e-6] {
            let r = at(t);
            assert!((r / t - slope).abs() < 10.0 * t, "t={t}: {}", r / t);
        }
    }

    #[test]
    fn outlier_residuals_are_flagged() {
        let e = vec![1.0, 2.0, 3.0, 9.0];
        let mut res = vec![1e-13, 1e-13, 1e-2, 0.5];
        let flagged = flag_spurious(&e, &mut res, 0.0, 5.0, 1e-8);
        assert_eq!(flagged, 1);
        assert_eq!(res, vec![1e-13, 1e-13, SPURIOUS, 0.5]);

        // uniformly poor residuals stay (no outlier)
        let mut res = vec![1e-3, 2e-3, 3e-3, 0.5];
        assert_eq!(flag_spurious(&e, &mut res, 0.0, 5.0, 1e-8), 0);
    }
}
