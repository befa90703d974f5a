//! Designs that change the price across inventory levels under CVaR.

use super::calibrate::{bisect_boundary, BOUNDARY_RTOL};
use super::forward::{solve_forward_delay_integral, LevelRecursion};
use super::neutral::{design_risk_neutral, neutral_levels};
use super::static_risk::design_static_risk;
use super::{reservation, DesignRequest, ReservationPolicy};
use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::model::{MarketParams, PricingProfile};
use crate::scalar::Scalar;

pub(crate) fn alpha_ceiling<T: Scalar>(p: &MarketParams<T>) -> T {
    T::lit(64.0) * p.log_ratio_bound()
}

fn flat_profile<T: Scalar>(p: MarketParams<T>, q: Vec<usize>, m: usize) -> Result<PricingProfile<T>> {
    let levels = vec![GridFn::constant(m, p.lower); p.delta_cap + 1];
    super::finish(p, T::one(), q, levels)
}

/// Levels of the fully dynamic design (one unit per level) at ratio `alpha`.
///
/// The first `⌊k/α⌋` levels are flat at `L`; the next one leaves `L` once its
/// own look-back integral is large enough, and every later level integrates
/// over all levels between the transition level and itself.
pub fn fully_dynamic_levels<T: Scalar>(params: &MarketParams<T>, alpha: T, m: usize) -> Result<Vec<GridFn<T>>> {
    let k = params.k;
    if params.is_risk_neutral() {
        return neutral_levels(params, alpha, &vec![1; k], m);
    }
    let (l, d) = (params.lower, params.delta_risk);
    let kf = T::from_usize_exact(k);
    let flat = (kf / alpha).floor().to_usize().unwrap_or(k).min(k);
    let coefficient = alpha / (kf * d);
    let base = T::from_usize_exact(flat) * l * d;
    let mut levels = vec![GridFn::constant(m, l); flat];
    let mut agg: Option<GridFn<T>> = None;
    for _ in flat..k {
        let rec = LevelRecursion { coefficient, base, lower: agg.as_ref(), self_weight: T::one(), delta: d, floor: l };
        let f = solve_forward_delay_integral(&rec, m)?;
        agg = Some(match agg {
            None => f.clone(),
            Some(g) => GridFn::weighted_sum(m, [(T::one(), &g), (T::one(), &f)]),
        });
        levels.push(f);
    }
    Ok(levels)
}

/// Fully dynamic design: `Δ = k - 1`, every level sells one unit.
pub fn design_fully_dynamic<T: Scalar>(req: &DesignRequest<T>) -> Result<PricingProfile<T>> {
    let p = req.params;
    req.check()?;
    if p.delta_cap + 1 != p.k {
        return Err(Error::InvalidParams("fully dynamic design needs delta_cap = k - 1".into()));
    }
    if !matches!(req.reservation_policy, ReservationPolicy::EvenSplit) {
        return Err(Error::InvalidReservation("fully dynamic design sells one unit per level".into()));
    }
    if p.is_risk_neutral() {
        return design_risk_neutral(req);
    }
    let q = vec![1; p.k];
    if p.upper <= p.lower {
        return flat_profile(p, q, req.grid_size);
    }
    let m = req.grid_size;
    let top = |a: T| -> Result<T> { Ok(fully_dynamic_levels(&p, a, m)?.last().map_or(p.lower, |f| f.last())) };
    let alpha = bisect_boundary(top, p.upper, T::one(), alpha_ceiling(&p), T::lit(BOUNDARY_RTOL), req.alpha_tolerance)?;
    let levels = fully_dynamic_levels(&p, alpha, m)?;
    super::finish(p, alpha, q, levels)
}

/// Levels of the Δ-dynamic design at ratio `alpha` with reservation `q`.
///
/// Level 1 is flat at `L`. Level `i ≥ 2` solves the delay-integral recursion
/// with coefficient `α/(2kδ)`, base `q_1·L·δ`, the lower levels weighted by
/// their reservations, and its own look-back weighted by `q_i`. Each level is
/// floored at the right end of the previous one so prices never step down.
pub fn delta_dynamic_levels<T: Scalar>(params: &MarketParams<T>, alpha: T, q: &[usize], m: usize) -> Result<Vec<GridFn<T>>> {
    let (l, d) = (params.lower, params.delta_risk);
    let kf = T::from_usize_exact(params.k);
    let coefficient = alpha / (T::lit(2.0) * kf * d);
    let base = T::from_usize_exact(q[0]) * l * d;
    let mut levels = vec![GridFn::constant(m, l)];
    let mut agg: Option<GridFn<T>> = None;
    for &qi in &q[1..] {
        let qf = T::from_usize_exact(qi);
        let floor = levels.last().map_or(l, |f| f.last());
        let rec = LevelRecursion { coefficient, base, lower: agg.as_ref(), self_weight: qf, delta: d, floor };
        let f = solve_forward_delay_integral(&rec, m)?;
        agg = Some(match agg {
            None => GridFn::weighted_sum(m, [(qf, &f)]),
            Some(g) => GridFn::weighted_sum(m, [(T::one(), &g), (qf, &f)]),
        });
        levels.push(f);
    }
    Ok(levels)
}

/// Δ-dynamic design with `q_1 = ⌈k/α⌉` and the rest split near-evenly.
///
/// `q_1` jumps whenever `k/α` crosses an integer, so `φ_top(1)` is only
/// piecewise continuous in α. The search first locates the `q_1` interval
/// `[k/q_1, k/(q_1 - 1))` whose upper end is feasible, then solves inside it
/// with `q_1` held fixed. If the boundary is already exceeded at the lower
/// end of that interval, the lower end is used and prices are capped at `U`.
pub fn design_delta_dynamic<T: Scalar>(req: &DesignRequest<T>) -> Result<PricingProfile<T>> {
    let p = req.params;
    req.check()?;
    if p.delta_cap == 0 {
        return design_static_risk(req);
    }
    if matches!(req.reservation_policy, ReservationPolicy::Explicit(_)) {
        return Err(Error::InvalidReservation(
            "the Δ-dynamic reservation depends on alpha and cannot be given explicitly".into(),
        ));
    }
    let (k, m) = (p.k, req.grid_size);
    if p.upper <= p.lower {
        let q = reservation::ceil_first(k, p.delta_cap, k).expect("q_1 = k fits");
        return flat_profile(p, q, m);
    }
    let kf = T::from_usize_exact(k);
    let ceiling = alpha_ceiling(&p);
    let interval = |q1: usize| -> (T, T) {
        let lo = (kf / T::from_usize_exact(q1)).max(T::one());
        let hi = if q1 >= 2 { kf / T::from_usize_exact(q1 - 1) } else { ceiling };
        (lo, hi.min(ceiling))
    };
    let reservation_for = |q1: usize| reservation::ceil_first(k, p.delta_cap, q1).expect("q_1 ≤ k");
    let top = |a: T, q: &[usize]| -> Result<T> { Ok(delta_dynamic_levels(&p, a, q, m)?.last().map_or(p.lower, |f| f.last())) };
    let feasible_at_sup = |q1: usize| -> Result<bool> {
        let q = reservation_for(q1);
        Ok(top(interval(q1).1, &q)? >= p.upper * (T::one() - T::lit(BOUNDARY_RTOL)))
    };

    // Larger q_1 means smaller α. Find the largest q_1 whose interval reaches U.
    if !feasible_at_sup(1)? {
        let q = reservation_for(1);
        let (lo, hi) = interval(1);
        return Err(Error::Unbracketed {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: (top(lo, &q)? - p.upper).as_f64(),
            f_hi: (top(hi, &q)? - p.upper).as_f64(),
        });
    }
    let (mut good, mut bad) = (1usize, k + 1);
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        if feasible_at_sup(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    let q1 = good;
    let q = reservation_for(q1);
    let (lo, hi) = interval(q1);
    let at_lo = top(lo, &q)?;
    let alpha = if at_lo >= p.upper {
        lo
    } else {
        bisect_boundary(|a| top(a, &q), p.upper, lo, hi, T::lit(BOUNDARY_RTOL), req.alpha_tolerance)?
    };
    let levels = delta_dynamic_levels(&p, alpha, &q, m)?;
    super::finish(p, alpha, q, levels)
}
