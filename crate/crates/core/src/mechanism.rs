//! Seeded execution of the correlated posted-price mechanism, the fractional
//! allocator it rounds, and three baseline mechanisms.

use crate::error::{Error, Result};
use crate::model::{validate, Instance, MarketParams, PricingProfile, SeedOutcome};
use crate::pricing::{design_risk_neutral, DesignRequest, ReservationPolicy};
use crate::scalar::Scalar;

fn check_instance<T: Scalar>(params: &MarketParams<T>, instance: &Instance<T>) -> Result<()> {
    validate(params, instance).map_err(|v| Error::InvalidInstance(v.to_string()))
}

fn check_seed<T: Scalar>(r: T) -> Result<()> {
    if r >= T::zero() && r <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("seed {r} outside [0, 1]")))
    }
}

/// Level of the `(y+1)`-th unit: the largest `j` with `starts[j] ≤ y`.
#[inline]
fn level_of(starts: &[usize], y: usize) -> usize {
    starts.partition_point(|&s| s <= y) - 1
}

/// Runs the mechanism with the seed fixed to `r`.
///
/// Once all `k` units are sold the top level's price keeps being posted and
/// every later buyer is turned away.
pub fn run_cppm<T: Scalar>(profile: &PricingProfile<T>, instance: &Instance<T>, r: T) -> Result<SeedOutcome<T>> {
    check_instance(&profile.params, instance)?;
    check_seed(r)?;
    let prices = profile.prices_at(r);
    let starts = profile.level_starts();
    Ok(sequential(&prices, &starts, profile.params.k, instance, r))
}

/// Shared executor: `prices[j]` is posted while the level is `j`.
fn sequential<T: Scalar>(prices: &[T], starts: &[usize], k: usize, instance: &Instance<T>, seed: T) -> SeedOutcome<T> {
    let n = instance.len();
    let top = prices.len() - 1;
    let mut out = SeedOutcome {
        seed,
        allocations: Vec::with_capacity(n),
        posted_prices: Vec::with_capacity(n),
        levels: Vec::with_capacity(n),
        welfare: T::zero(),
        revenue: T::zero(),
        units_by_level: vec![0; prices.len()],
    };
    let mut y = 0usize;
    for &v in &instance.valuations {
        let j = if y < k { level_of(starts, y) } else { top };
        let p = prices[j];
        let sold = y < k && v >= p;
        if sold {
            y += 1;
            out.welfare = out.welfare + v;
            out.revenue = out.revenue + p;
            out.units_by_level[j] += 1;
        }
        out.allocations.push(sold);
        out.posted_prices.push(p);
        out.levels.push(j);
    }
    out
}

/// Welfare, revenue and units sold, without per-buyer detail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunTotals<T> {
    pub welfare: T,
    pub revenue: T,
    pub sold: usize,
}

/// Same mechanism over run-length encoded valuations `(value, count)`.
///
/// Calls `after_run(i, totals)` after the `i`-th run, so one pass yields the
/// outcome on every prefix of the sequence.
pub fn run_cppm_runs<T: Scalar>(
    profile: &PricingProfile<T>,
    runs: &[(T, usize)],
    r: T,
    mut after_run: impl FnMut(usize, RunTotals<T>),
) -> RunTotals<T> {
    let prices = profile.prices_at(r);
    let starts = profile.level_starts();
    let k = profile.params.k;
    let mut t = RunTotals { welfare: T::zero(), revenue: T::zero(), sold: 0 };
    for (i, &(v, count)) in runs.iter().enumerate() {
        let mut left = count;
        while left > 0 && t.sold < k {
            let j = level_of(&starts, t.sold);
            let p = prices[j];
            if v < p {
                break;
            }
            let end = starts.get(j + 1).copied().unwrap_or(k);
            let take = left.min(end - t.sold);
            let tf = T::from_usize_exact(take);
            t.sold += take;
            t.welfare = t.welfare + tf * v;
            t.revenue = t.revenue + tf * p;
            left -= take;
        }
        after_run(i, t);
    }
    t
}

/// Decisions of the fractional water-filling allocator.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalTrace<T> {
    /// Fraction of a unit given to each buyer.
    pub x_hat: Vec<T>,
    /// Cumulative fractional utilization after each buyer.
    pub y_hat: Vec<T>,
    /// One-based unit being filled when each buyer arrives, `⌊ŷ⌋ + 1` capped at `k`.
    pub kappa: Vec<usize>,
}

/// `sup { s ∈ [0, k] : φ_{⌊s⌋+1}(s - ⌊s⌋) ≤ v }` for a per-unit profile.
fn fill_level<T: Scalar>(profile: &PricingProfile<T>, v: T) -> T {
    for (i, f) in profile.levels.iter().enumerate() {
        let i_f = T::from_usize_exact(i);
        if f.first() > v {
            return i_f;
        }
        if f.last() > v {
            return i_f + f.generalized_inverse(v).unwrap_or(T::zero());
        }
    }
    T::from_usize_exact(profile.levels.len())
}

/// Fractional allocator for a profile that sells one unit per level.
///
/// Each buyer receives as much as possible along the marginal-price curve
/// `s ↦ φ_{⌊s⌋+1}(s - ⌊s⌋)` while the marginal price stays at or below the
/// valuation, at most one unit and never beyond the inventory.
pub fn run_fractional<T: Scalar>(profile: &PricingProfile<T>, instance: &Instance<T>) -> Result<FractionalTrace<T>> {
    check_instance(&profile.params, instance)?;
    if profile.reservation.iter().any(|&q| q != 1) {
        return Err(Error::InvalidArgument("fractional allocation needs one unit per level".into()));
    }
    let k = profile.params.k;
    let kf = T::from_usize_exact(k);
    let n = instance.len();
    let mut trace = FractionalTrace { x_hat: Vec::with_capacity(n), y_hat: Vec::with_capacity(n), kappa: Vec::with_capacity(n) };
    let mut y = T::zero();
    for &v in &instance.valuations {
        let unit = y.floor().to_usize().unwrap_or(0).min(k - 1) + 1;
        let cap = T::one().min(kf - y).max(T::zero());
        let x = (fill_level(profile, v) - y).max(T::zero()).min(cap);
        y = y + x;
        trace.x_hat.push(x);
        trace.y_hat.push(y);
        trace.kappa.push(unit);
    }
    Ok(trace)
}

/// The three reference mechanisms, with their pricing built once.
///
/// * `d_dynamic` posts `φ((i-1)/k)` for the `i`-th unit, with the exponential
///   risk-neutral curve `φ`; no randomness.
/// * `r_static` is the risk-neutral design with a single level.
/// * `r_dynamic` draws an independent seed per unit and posts `φ_i(seed_i)`
///   from the risk-neutral one-unit-per-level design.
#[derive(Debug, Clone)]
pub struct Baselines<T> {
    params: MarketParams<T>,
    static_profile: PricingProfile<T>,
    unit_profile: PricingProfile<T>,
    unit_prices: Vec<T>,
}

impl<T: Scalar> Baselines<T> {
    pub fn new(params: MarketParams<T>, grid_size: usize) -> Result<Self> {
        let neutral = params.with_risk(T::one());
        let static_profile = design_risk_neutral(&DesignRequest::new(neutral.with_cap(0)).with_grid_size(grid_size))?;
        let unit_profile = design_risk_neutral(
            &DesignRequest::new(neutral.with_cap(params.k - 1))
                .with_grid_size(grid_size)
                .with_reservation(ReservationPolicy::Explicit(vec![1; params.k])),
        )?;
        let alpha = neutral.log_ratio_bound();
        let kf = T::from_usize_exact(params.k);
        let unit_prices = (0..params.k)
            .map(|i| {
                let x = T::from_usize_exact(i) / kf;
                if alpha * x < T::one() {
                    params.lower
                } else {
                    params.lower * (alpha * x - T::one()).exp()
                }
            })
            .collect();
        Ok(Self { params, static_profile, unit_profile, unit_prices })
    }

    pub fn params(&self) -> &MarketParams<T> {
        &self.params
    }

    pub fn static_profile(&self) -> &PricingProfile<T> {
        &self.static_profile
    }

    pub fn unit_profile(&self) -> &PricingProfile<T> {
        &self.unit_profile
    }

    /// Deterministic per-unit prices of `d_dynamic`.
    pub fn unit_prices(&self) -> &[T] {
        &self.unit_prices
    }

    pub fn d_dynamic(&self, instance: &Instance<T>) -> Result<SeedOutcome<T>> {
        check_instance(&self.params, instance)?;
        let starts: Vec<usize> = (0..self.params.k).collect();
        Ok(sequential(&self.unit_prices, &starts, self.params.k, instance, T::zero()))
    }

    pub fn r_static(&self, instance: &Instance<T>, r: T) -> Result<SeedOutcome<T>> {
        run_cppm(&self.static_profile, instance, r)
    }

    pub fn r_dynamic(&self, instance: &Instance<T>, seeds: &[T]) -> Result<SeedOutcome<T>> {
        check_instance(&self.params, instance)?;
        if seeds.len() != self.params.k {
            return Err(Error::InvalidArgument(format!("expected {} seeds, got {}", self.params.k, seeds.len())));
        }
        for &s in seeds {
            check_seed(s)?;
        }
        let prices: Vec<T> = self.unit_profile.levels.iter().zip(seeds).map(|(f, &s)| f.eval(s)).collect();
        let starts: Vec<usize> = (0..self.params.k).collect();
        Ok(sequential(&prices, &starts, self.params.k, instance, seeds[0]))
    }
}

pub fn run_d_dynamic<T: Scalar>(params: &MarketParams<T>, instance: &Instance<T>) -> Result<SeedOutcome<T>> {
    Baselines::new(*params, crate::pricing::DEFAULT_GRID_SIZE)?.d_dynamic(instance)
}

pub fn run_r_static<T: Scalar>(params: &MarketParams<T>, instance: &Instance<T>, r: T) -> Result<SeedOutcome<T>> {
    Baselines::new(*params, crate::pricing::DEFAULT_GRID_SIZE)?.r_static(instance, r)
}

pub fn run_r_dynamic<T: Scalar>(params: &MarketParams<T>, instance: &Instance<T>, seeds: &[T]) -> Result<SeedOutcome<T>> {
    Baselines::new(*params, crate::pricing::DEFAULT_GRID_SIZE)?.r_dynamic(instance, seeds)
}
