//! Static (single price level) design for the CVaR objective.
//!
//! With `τ = 1 - δ` and `c = α/δ`, the price is `L` up to the breakpoint
//! `b = 1 - δ + δ/α` and `L·E_c(x - b)` after it, where `E_c` is the
//! delay exponential solving `E'(t) = c·E(t - τ)` with `E = 1` on `[-τ, 0]`.

use super::calibrate::bisect_boundary;
use super::neutral::design_risk_neutral;
use super::DesignRequest;
use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::model::{MarketParams, PricingProfile};
use crate::scalar::Scalar;

/// `E_c(t) = 1 + Σ_{j≥1} c^j/j! · ((t - (j-1)τ)_+)^j`.
///
/// Terms are formed in log space; the sum stops once they become negligible.
pub fn delay_exponential<T: Scalar>(c: T, tau: T, t: T) -> Result<T> {
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("delay tau = {tau} must be positive")));
    }
    if !(c >= T::zero()) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!("rate c = {c} must be nonnegative")));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument("non-finite argument".into()));
    }
    if t <= T::zero() || c == T::zero() {
        return Ok(T::one());
    }
    let n = (t / tau).floor().to_usize().unwrap_or(usize::MAX - 1).saturating_add(1);
    let mut sum = T::one();
    let mut ln_fact = T::zero();
    for j in 1..=n {
        let jf = T::from_usize_exact(j);
        ln_fact = ln_fact + jf.ln();
        let s = t - (jf - T::one()) * tau;
        if s <= T::zero() {
            break;
        }
        let term = (jf * (c * s).ln() - ln_fact).exp();
        sum = sum + term;
        if jf > T::lit(2.0) * c * t && term <= T::epsilon() * sum {
            break;
        }
    }
    Ok(sum)
}

/// `L·E_{α/δ}(δ(1 - 1/α))`, the right end of the static price at ratio α.
fn static_top<T: Scalar>(p: &MarketParams<T>, alpha: T) -> Result<T> {
    let d = p.delta_risk;
    Ok(p.lower * delay_exponential(alpha / d, T::one() - d, d * (T::one() - T::one() / alpha))?)
}

/// Smallest α for which the static design reaches `U` at `x = 1`.
pub fn solve_static_alpha<T: Scalar>(params: &MarketParams<T>) -> Result<T> {
    if let Some(v) = params.check() {
        return Err(Error::InvalidParams(v.to_string()));
    }
    if params.upper <= params.lower {
        return Ok(T::one());
    }
    if params.is_risk_neutral() {
        return Ok(params.log_ratio_bound());
    }
    let hi = T::lit(64.0) * params.log_ratio_bound() / params.delta_risk;
    bisect_boundary(
        |a| static_top(params, a),
        params.upper,
        T::one(),
        hi,
        T::lit(1e-13).max(T::lit(8.0) * T::epsilon()),
        T::lit(4.0) * T::epsilon() * hi,
    )
}

/// The static price curve at ratio `alpha`, sampled on `m` cells.
pub fn static_levels<T: Scalar>(params: &MarketParams<T>, alpha: T, m: usize) -> Result<GridFn<T>> {
    let d = params.delta_risk;
    let l = params.lower;
    if params.is_risk_neutral() {
        return GridFn::from_fn(m, |x| if alpha * x < T::one() { l } else { l * (alpha * x - T::one()).exp() });
    }
    let (c, tau) = (alpha / d, T::one() - d);
    let b = T::one() - d + d / alpha;
    let samples = (0..=m)
        .map(|i| {
            let x = T::from_usize_exact(i) / T::from_usize_exact(m);
            if x <= b {
                Ok(l)
            } else {
                Ok(l * delay_exponential(c, tau, x - b)?)
            }
        })
        .collect::<Result<Vec<T>>>()?;
    GridFn::from_samples(samples)
}

/// Static (`Δ = 0`) design for any `δ ∈ (0, 1]`.
pub fn design_static_risk<T: Scalar>(req: &DesignRequest<T>) -> Result<PricingProfile<T>> {
    let p = req.params;
    req.check()?;
    if p.delta_cap != 0 {
        return Err(Error::InvalidParams("static design needs delta_cap = 0".into()));
    }
    if p.is_risk_neutral() {
        return design_risk_neutral(req);
    }
    let alpha = solve_static_alpha(&p)?;
    let level = static_levels(&p, alpha, req.grid_size)?;
    super::finish(p, alpha, vec![p.k], vec![level])
}

/// Outcome of checking the static lower-bound constraints at one ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticLbReport<T> {
    /// `(1 - δ + δ/α) - ψ(L)`.
    pub breakpoint_violation: T,
    /// Largest `v/α - lhs(v)` over the probed valuations.
    pub integral_violation: T,
    /// Valuation where the integral constraint is tightest.
    pub worst_valuation: T,
    /// Maximum of the two, signed: positive means a constraint fails.
    pub max_violation: T,
}

/// Checks the two constraints any static pricing function must satisfy to be
/// α-competitive for CVaR at level δ, with `ψ = φ*`:
///
/// ```text
/// ψ(L) ≥ 1 - δ + δ/α
/// (L/δ)·min(δ - 1 + ψ(v), ψ(L)) + (1/δ)·∫_{ψ(L)}^{max(ψ(L), δ-1+ψ(v))} φ ≥ v/α
/// ```
///
/// `probes` valuations are spread evenly over `[L, U]`.
pub fn check_static_lb_constraints<T: Scalar>(
    profile: &PricingProfile<T>,
    alpha: T,
    probes: usize,
) -> Result<StaticLbReport<T>> {
    let p = &profile.params;
    if profile.num_levels() != 1 {
        return Err(Error::InvalidArgument("lower-bound constraints apply to a single level".into()));
    }
    if probes < 2 {
        return Err(Error::InvalidArgument("need at least two probe valuations".into()));
    }
    let phi = &profile.levels[0];
    let d = p.delta_risk;
    let psi = |v: T| phi.generalized_inverse(v).unwrap_or(T::zero());
    let psi_l = psi(p.lower);
    let breakpoint_violation = (T::one() - d + d / alpha) - psi_l;
    let mut integral_violation = T::neg_infinity();
    let mut worst_valuation = p.lower;
    for i in 0..probes {
        let v = p.lower + (p.upper - p.lower) * T::from_usize_exact(i) / T::from_usize_exact(probes - 1);
        let shifted = d - T::one() + psi(v);
        let lhs = p.lower / d * shifted.min(psi_l) + phi.integral(psi_l, psi_l.max(shifted)) / d;
        let viol = v / alpha - lhs;
        if viol > integral_violation {
            integral_violation = viol;
            worst_valuation = v;
        }
    }
    Ok(StaticLbReport {
        breakpoint_violation,
        integral_violation,
        worst_valuation,
        max_violation: breakpoint_violation.max(integral_violation),
    })
}
