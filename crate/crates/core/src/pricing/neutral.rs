//! Exponential pricing for the risk-neutral objective.

use super::{reservation, DesignRequest, ReservationPolicy};
use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::model::{MarketParams, PricingProfile};
use crate::scalar::Scalar;

/// Levels of the exponential design at an arbitrary ratio `alpha`.
///
/// With `s = (Σ_{l<j} q_l + q_j x) / k`, level `j` is `L` while `s < 1/α` and
/// `L·exp(α s - 1)` afterwards.
pub fn neutral_levels<T: Scalar>(params: &MarketParams<T>, alpha: T, q: &[usize], m: usize) -> Result<Vec<GridFn<T>>> {
    let kf = T::from_usize_exact(params.k);
    let lower = params.lower;
    let mut start = 0usize;
    q.iter()
        .map(|&qj| {
            let s0 = T::from_usize_exact(start);
            let qf = T::from_usize_exact(qj);
            start += qj;
            GridFn::from_fn(m, |x| {
                let s = (s0 + qf * x) / kf;
                if alpha * s < T::one() {
                    lower
                } else {
                    lower * (alpha * s - T::one()).exp()
                }
            })
        })
        .collect()
}

/// Reservation vector for the risk-neutral design.
pub(crate) fn neutral_reservation<T: Scalar>(req: &DesignRequest<T>, alpha: T) -> Result<Vec<usize>> {
    let p = &req.params;
    let n = p.delta_cap + 1;
    let q = match &req.reservation_policy {
        ReservationPolicy::EvenSplit => reservation::even_split(p.k, n),
        ReservationPolicy::CeilFirst => {
            let q1 = (T::from_usize_exact(p.k) / alpha).ceil().to_usize().unwrap_or(p.k).clamp(1, p.k);
            reservation::ceil_first(p.k, p.delta_cap, q1)
                .ok_or_else(|| Error::InvalidReservation("q_1 exceeds k".into()))?
        }
        ReservationPolicy::Explicit(q) => q.clone(),
    };
    reservation::check_nondecreasing(&q, p.k, n)?;
    Ok(q)
}

/// Optimal design for `δ = 1`: `α = 1 + ln(U/L)` for every cap.
pub fn design_risk_neutral<T: Scalar>(req: &DesignRequest<T>) -> Result<PricingProfile<T>> {
    let p = req.params;
    req.check()?;
    if !p.is_risk_neutral() {
        return Err(Error::InvalidParams("risk-neutral design needs delta_risk = 1".into()));
    }
    let alpha = p.log_ratio_bound();
    let q = neutral_reservation(req, alpha)?;
    let levels = neutral_levels(&p, alpha, &q, req.grid_size)?;
    super::finish(p, alpha, q, levels)
}
