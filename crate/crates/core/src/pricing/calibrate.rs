//! Root search on α for the boundary condition `φ_top(1) = U`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) const MAX_ITERATIONS: usize = 200;

/// Relative tolerance on `|φ_top(1) - U|` that stops the search early.
pub(crate) const BOUNDARY_RTOL: f64 = 1e-8;

/// Finds `α ∈ [lo, hi]` with `top(α) ≈ target`, for `top` nondecreasing in α.
///
/// Bracketing search on `ln top - ln target`: Illinois-style false position,
/// falling back to plain bisection whenever the bracket fails to halve.
/// Stops when `|top(α) - target| ≤ rtol·target` or the bracket is narrower
/// than `alpha_tol`; in the second case the upper (feasible) end is returned.
pub(crate) fn bisect_boundary<T: Scalar>(
    mut top: impl FnMut(T) -> Result<T>,
    target: T,
    lo: T,
    hi: T,
    rtol: T,
    alpha_tol: T,
) -> Result<T> {
    let (mut lo, mut hi) = (lo, hi);
    let ln_target = target.ln();
    let tol = rtol * target;
    let (t_lo, t_hi) = (top(lo)?, top(hi)?);
    if (t_lo - target).abs() <= tol {
        return Ok(lo);
    }
    if (t_hi - target).abs() <= tol {
        return Ok(hi);
    }
    if !(t_lo < target && t_hi > target) {
        return Err(Error::Unbracketed {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: (t_lo - target).as_f64(),
            f_hi: (t_hi - target).as_f64(),
        });
    }
    let (mut g_lo, mut g_hi) = (t_lo.ln() - ln_target, t_hi.ln() - ln_target);
    let mut side = 0i8;
    let mut width = hi - lo;
    let half = T::lit(0.5);
    for it in 0..MAX_ITERATIONS {
        let secant = hi - g_hi * (hi - lo) / (g_hi - g_lo);
        let bisect = it % 3 == 2 && hi - lo > half * width;
        if it % 3 == 2 {
            width = hi - lo;
        }
        let mid = if bisect || !(secant > lo && secant < hi) { lo + (hi - lo) * half } else { secant };
        let t = top(mid)?;
        if (t - target).abs() <= tol {
            return Ok(mid);
        }
        let g = t.ln() - ln_target;
        if t < target {
            lo = mid;
            g_lo = g;
            if side == -1 {
                g_hi = g_hi * half;
            }
            side = -1;
        } else {
            hi = mid;
            g_hi = g;
            if side == 1 {
                g_lo = g_lo * half;
            }
            side = 1;
        }
        if hi - lo <= alpha_tol {
            break;
        }
    }
    Ok(hi)
}
