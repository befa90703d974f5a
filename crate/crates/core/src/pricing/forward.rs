//! Forward solver for the delay-integral recursions behind the risk-sensitive
//! designs.
//!
//! Every level `i` satisfies an equation of the form
//!
//! ```text
//! φ(x) = max(floor, c·(base + W_G(x) + w·∫_0^{(δ-1+x)+} φ))
//! W_G(x) = ∫_x^{min(1, x+δ)} G + ∫_0^{(δ-1+x)+} G
//! ```
//!
//! where `G` aggregates the already solved lower levels. The self term only
//! looks back to `x - (1-δ)`, so the grid can be filled left to right. When
//! the look-back reaches into the cell being filled (`1 - δ < 1/M`), the
//! trapezoid contribution of the unknown node is moved to the left-hand side.

use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct LevelRecursion<'a, T> {
    pub coefficient: T,
    pub base: T,
    /// Weighted sum of the lower levels entering both windows.
    pub lower: Option<&'a GridFn<T>>,
    pub self_weight: T,
    pub delta: T,
    pub floor: T,
}

/// Solves one level on a grid of `m` cells.
pub fn solve_forward_delay_integral<T: Scalar>(rec: &LevelRecursion<'_, T>, m: usize) -> Result<GridFn<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("grid size must be positive".into()));
    }
    if !(rec.delta > T::zero() && rec.delta <= T::one()) {
        return Err(Error::InvalidArgument(format!("delta {} outside (0, 1]", rec.delta)));
    }
    if let Some(g) = rec.lower {
        if g.grid_size() != m {
            return Err(Error::InvalidArgument("lower aggregate uses a different grid".into()));
        }
    }
    let mf = T::from_usize_exact(m);
    let h = T::one() / mf;
    let half = T::lit(0.5);
    let gap = T::one() - rec.delta;
    let mut s: Vec<T> = Vec::with_capacity(m + 1);
    let mut prefix: Vec<T> = Vec::with_capacity(m + 1);
    for n in 0..=m {
        let x = T::from_usize_exact(n) / mf;
        let u = (x - gap).max(T::zero());
        let window = match rec.lower {
            Some(g) => g.integral(x, (x + rec.delta).min(T::one())) + g.integral_to(u),
            None => T::zero(),
        };
        // ∫_0^u φ = known + implicit·φ_n
        let (known, implicit) = if n == 0 {
            (T::zero(), T::zero())
        } else {
            let p = (u * mf).min(T::from_usize_exact(n));
            let mut i = p.floor().to_usize().unwrap_or(0);
            if i >= n {
                i = n - 1;
            }
            let theta = (p - T::from_usize_exact(i)).max(T::zero()).min(T::one());
            let si = s[i];
            if i + 1 < n {
                let sa = si + theta * (s[i + 1] - si);
                (prefix[i] + theta * h * (si + sa) * half, T::zero())
            } else {
                // the cell ends at the unknown node
                (prefix[i] + theta * h * si * (T::one() - theta * half), theta * theta * h * half)
            }
        };
        let rhs = rec.coefficient * (rec.base + window + rec.self_weight * known);
        let denom = T::one() - rec.coefficient * rec.self_weight * implicit;
        if denom <= T::zero() {
            return Err(Error::IllConditionedStep(denom.as_f64()));
        }
        let v = (rhs / denom).max(rec.floor);
        if !v.is_finite() {
            return Err(Error::IllConditionedStep(denom.as_f64()));
        }
        let acc = if n == 0 { T::zero() } else { prefix[n - 1] + h * (s[n - 1] + v) * half };
        s.push(v);
        prefix.push(acc);
    }
    GridFn::from_samples(s)
}
