//! Domain types shared by every other module.

mod format;

pub use format::{parse_instance, read_instance, read_profile, write_profile, ProfileDocument};

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::scalar::Scalar;

/// Constants of one kSelection-(δ, Δ) setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams<T> {
    /// Lower valuation bound `L`.
    pub lower: T,
    /// Upper valuation bound `U`.
    pub upper: T,
    /// Inventory `k`.
    pub k: usize,
    /// Price-change cap `Δ`.
    pub delta_cap: usize,
    /// Tail probability `δ` of the CVaR objective; `1` is risk neutral.
    pub delta_risk: T,
}

/// The first invariant an input breaks.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveLower,
    LowerAboveUpper,
    ZeroInventory,
    CapTooLarge { delta_cap: usize, k: usize },
    RiskOutOfRange,
    NonFinite,
    ValuationBelowLower { index: usize },
    ValuationAboveUpper { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveLower => write!(f, "L must be positive"),
            Violation::LowerAboveUpper => write!(f, "L > U"),
            Violation::ZeroInventory => write!(f, "k must be at least 1"),
            Violation::CapTooLarge { delta_cap, k } => {
                write!(f, "price-change cap {delta_cap} exceeds k - 1 = {}", k - 1)
            }
            Violation::RiskOutOfRange => write!(f, "delta_risk must lie in (0, 1]"),
            Violation::NonFinite => write!(f, "non-finite parameter"),
            Violation::ValuationBelowLower { index } => {
                write!(f, "valuation below L at buyer {}", index + 1)
            }
            Violation::ValuationAboveUpper { index } => {
                write!(f, "valuation above U at buyer {}", index + 1)
            }
        }
    }
}

impl<T: Scalar> MarketParams<T> {
    /// Builds and checks a parameter set.
    pub fn new(lower: T, upper: T, k: usize, delta_cap: usize, delta_risk: T) -> Result<Self> {
        let p = Self { lower, upper, k, delta_cap, delta_risk };
        match p.check() {
            Some(v) => Err(Error::InvalidParams(v.to_string())),
            None => Ok(p),
        }
    }

    pub fn check(&self) -> Option<Violation> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.delta_risk.is_finite()) {
            return Some(Violation::NonFinite);
        }
        if self.lower <= T::zero() {
            return Some(Violation::NonPositiveLower);
        }
        if self.lower > self.upper {
            return Some(Violation::LowerAboveUpper);
        }
        if self.k == 0 {
            return Some(Violation::ZeroInventory);
        }
        if self.delta_cap > self.k - 1 {
            return Some(Violation::CapTooLarge { delta_cap: self.delta_cap, k: self.k });
        }
        if !(self.delta_risk > T::zero() && self.delta_risk <= T::one()) {
            return Some(Violation::RiskOutOfRange);
        }
        None
    }

    /// `1 + ln(U/L)`, the optimal risk-neutral competitive ratio.
    pub fn log_ratio_bound(&self) -> T {
        T::one() + (self.upper / self.lower).ln()
    }

    pub fn is_risk_neutral(&self) -> bool {
        self.delta_risk >= T::one()
    }

    pub fn with_cap(mut self, delta_cap: usize) -> Self {
        self.delta_cap = delta_cap;
        self
    }

    pub fn with_risk(mut self, delta_risk: T) -> Self {
        self.delta_risk = delta_risk;
        self
    }
}

/// An ordered sequence of buyer valuations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Instance<T> {
    pub valuations: Vec<T>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(valuations: Vec<T>) -> Self {
        Self { valuations }
    }

    pub fn len(&self) -> usize {
        self.valuations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valuations.is_empty()
    }

    /// Consecutive equal valuations as `(value, count)` runs.
    pub fn runs(&self) -> Vec<(T, usize)> {
        let mut out: Vec<(T, usize)> = Vec::new();
        for &v in &self.valuations {
            match out.last_mut() {
                Some((w, c)) if *w == v => *c += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

impl<T> From<Vec<T>> for Instance<T> {
    fn from(valuations: Vec<T>) -> Self {
        Self { valuations }
    }
}

/// Checks parameters and then every valuation against `[L, U]`.
pub fn validate<T: Scalar>(params: &MarketParams<T>, instance: &Instance<T>) -> std::result::Result<(), Violation> {
    if let Some(v) = params.check() {
        return Err(v);
    }
    for (index, &v) in instance.valuations.iter().enumerate() {
        if !v.is_finite() {
            return Err(Violation::NonFinite);
        }
        if v < params.lower {
            return Err(Violation::ValuationBelowLower { index });
        }
        if v > params.upper {
            return Err(Violation::ValuationAboveUpper { index });
        }
    }
    Ok(())
}

/// `Δ + 1` pricing functions on a shared grid plus the reservation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingProfile<T> {
    pub params: MarketParams<T>,
    /// Competitive ratio the design targets.
    pub alpha: T,
    /// Units reserved for each level; sums to `k`.
    pub reservation: Vec<usize>,
    pub levels: Vec<GridFn<T>>,
}

impl<T: Scalar> PricingProfile<T> {
    /// Assembles a profile and checks every structural invariant.
    pub fn new(params: MarketParams<T>, alpha: T, reservation: Vec<usize>, levels: Vec<GridFn<T>>) -> Result<Self> {
        let p = Self { params, alpha, reservation, levels };
        p.validate()?;
        Ok(p)
    }

    pub fn grid_size(&self) -> usize {
        self.levels[0].grid_size()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn top(&self) -> &GridFn<T> {
        self.levels.last().expect("profile has at least one level")
    }

    /// Slack for monotonicity and level-dominance comparisons (rounding only).
    pub fn tolerance(&self) -> T {
        self.params.upper * T::lit(1e-9).max(T::lit(64.0) * T::epsilon())
    }

    /// Slack for the boundary `φ_top(1) ≈ U`: `10·U/M`.
    pub fn boundary_tolerance(&self) -> T {
        T::lit(10.0) * self.params.upper / T::from_usize_exact(self.grid_size())
    }

    /// Prices of every level at seed `r`.
    pub fn prices_at(&self, r: T) -> Vec<T> {
        self.levels.iter().map(|f| f.eval(r)).collect()
    }

    /// Cumulative reservation: `starts[j] = Σ_{l<j} q_l`.
    pub fn level_starts(&self) -> Vec<usize> {
        let mut acc = 0;
        self.reservation
            .iter()
            .map(|&q| {
                let s = acc;
                acc += q;
                s
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        if let Some(v) = self.params.check() {
            return bad(v.to_string());
        }
        let n = self.params.delta_cap + 1;
        if self.levels.len() != n {
            return bad(format!("expected {n} levels, found {}", self.levels.len()));
        }
        if self.reservation.len() != n {
            return bad(format!("expected {n} reservation entries, found {}", self.reservation.len()));
        }
        let total: usize = self.reservation.iter().sum();
        if total != self.params.k {
            return bad(format!("reservation sums to {total}, expected k = {}", self.params.k));
        }
        let m = self.levels[0].grid_size();
        if self.levels.iter().any(|f| f.grid_size() != m) {
            return bad("levels use different grid sizes".into());
        }
        if !(self.alpha.is_finite() && self.alpha >= T::one()) {
            return bad(format!("alpha = {} is not a ratio >= 1", self.alpha));
        }
        let tol = self.tolerance();
        for (i, f) in self.levels.iter().enumerate() {
            if !f.is_nondecreasing(tol) {
                return bad(format!("level {} is not nondecreasing", i + 1));
            }
        }
        for (i, w) in self.levels.windows(2).enumerate() {
            if w[0].last() > w[1].first() + tol {
                return bad(format!(
                    "level {} ends at {} above the start {} of level {}",
                    i + 1,
                    w[0].last(),
                    w[1].first(),
                    i + 2
                ));
            }
        }
        if self.levels[0].first() < self.params.lower - tol {
            return bad(format!("lowest price {} is below L", self.levels[0].first()));
        }
        if self.top().last() > self.params.upper + self.boundary_tolerance() {
            return bad(format!("highest price {} exceeds U", self.top().last()));
        }
        Ok(())
    }
}

/// Result of running the mechanism at one realized seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome<T> {
    /// Realized seed; for multi-seed baselines the first seed.
    pub seed: T,
    pub allocations: Vec<bool>,
    pub posted_prices: Vec<T>,
    /// Zero-based price level used for each buyer.
    pub levels: Vec<usize>,
    pub welfare: T,
    pub revenue: T,
    pub units_by_level: Vec<usize>,
}

impl<T: Scalar> SeedOutcome<T> {
    pub fn units_sold(&self) -> usize {
        self.allocations.iter().filter(|&&x| x).count()
    }

    /// Utilization `y_t` seen by each buyer on arrival.
    pub fn utilization_before(&self) -> Vec<usize> {
        let mut y = 0;
        self.allocations
            .iter()
            .map(|&x| {
                let before = y;
                y += usize::from(x);
                before
            })
            .collect()
    }

    pub fn price_changes(&self) -> usize {
        self.posted_prices.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// `Σ_t (v_t - p_t) x_t`.
    pub fn buyer_utility(&self, instance: &Instance<T>) -> T {
        self.allocations
            .iter()
            .zip(&instance.valuations)
            .zip(&self.posted_prices)
            .filter(|((&x, _), _)| x)
            .map(|((_, &v), &p)| v - p)
            .sum()
    }
}

/// Distribution of welfare over the seed, as measure-weighted atoms sorted by welfare.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareDistribution<T> {
    atoms: Vec<(T, T)>,
}

fn kahan_sum<T: Scalar>(xs: impl Iterator<Item = T>) -> T {
    let (mut s, mut c) = (T::zero(), T::zero());
    for x in xs {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

impl<T: Scalar> WelfareDistribution<T> {
    /// Sorts atoms by welfare and merges equal values.
    ///
    /// Every measure must be positive and the total must be one.
    pub fn from_atoms(mut atoms: Vec<(T, T)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("distribution without atoms".into()));
        }
        if atoms.iter().any(|&(m, w)| !(m > T::zero() && m.is_finite() && w.is_finite())) {
            return Err(Error::InvalidArgument("atom with nonpositive measure or non-finite value".into()));
        }
        let total = kahan_sum(atoms.iter().map(|a| a.0));
        let n = T::from_usize_exact(atoms.len());
        let tol = T::lit(1e-12).max(T::lit(16.0) * T::epsilon() * n.sqrt());
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidArgument(format!("atom measures sum to {total}, not 1")));
        }
        atoms.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite welfare"));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(atoms.len());
        for (m, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.1 == w => last.0 = last.0 + m,
                _ => merged.push((m, w)),
            }
        }
        Ok(Self { atoms: merged })
    }

    /// `n` equally likely outcomes.
    pub fn uniform(values: impl IntoIterator<Item = T>) -> Result<Self> {
        let values: Vec<T> = values.into_iter().collect();
        let m = T::one() / T::from_usize_exact(values.len().max(1));
        Self::from_atoms(values.into_iter().map(|w| (m, w)).collect())
    }

    pub fn point(value: T) -> Self {
        Self { atoms: vec![(T::one(), value)] }
    }

    /// `(measure, welfare)` pairs in ascending welfare.
    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn mean(&self) -> T {
        kahan_sum(self.atoms.iter().map(|&(m, w)| m * w))
    }

    /// `P[W <= w]`.
    pub fn cdf(&self, w: T) -> T {
        kahan_sum(self.atoms.iter().take_while(|a| a.1 <= w).map(|a| a.0)).min(T::one())
    }

    pub fn mass_at(&self, w: T) -> T {
        self.atoms.iter().filter(|a| a.1 == w).map(|a| a.0).sum()
    }

    pub fn min(&self) -> T {
        self.atoms[0].1
    }

    pub fn max(&self) -> T {
        self.atoms[self.atoms.len() - 1].1
    }

    /// Smallest `w` with `P[W <= w] >= 1/2`.
    pub fn median(&self) -> T {
        let mut acc = T::zero();
        for &(m, w) in &self.atoms {
            acc = acc + m;
            if acc >= T::lit(0.5) {
                return w;
            }
        }
        self.max()
    }

    /// `sup_w |F(w) - G(w)|`.
    pub fn kolmogorov_distance(&self, other: &Self) -> T {
        let mut pts: Vec<T> = self.atoms.iter().chain(other.atoms.iter()).map(|a| a.1).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        pts.dedup();
        pts.into_iter()
            .map(|w| (self.cdf(w) - other.cdf(w)).abs())
            .fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MarketParams<f64> {
        MarketParams { lower: 1.0, upper: 100.0, k: 5, delta_cap: 2, delta_risk: 0.5 }
    }

    #[test]
    fn accepts_in_range_instance() {
        assert_eq!(validate(&params(), &Instance::new(vec![1.0, 50.0, 100.0])), Ok(()));
    }

    #[test]
    fn reports_valuation_below_l() {
        let err = validate(&params(), &Instance::new(vec![0.5])).unwrap_err();
        assert_eq!(err, Violation::ValuationBelowLower { index: 0 });
        assert!(err.to_string().contains("valuation below L"));
    }

    #[test]
    fn reports_l_above_u() {
        let p = MarketParams { lower: 2.0, upper: 1.0, ..params() };
        let err = validate(&p, &Instance::default()).unwrap_err();
        assert_eq!(err.to_string(), "L > U");
    }

    #[test]
    fn parameter_edge_cases() {
        assert!(MarketParams::new(1.0, 1.0, 1, 0, 1.0).is_ok());
        assert!(MarketParams::new(0.0, 1.0, 1, 0, 1.0).is_err());
        assert!(MarketParams::new(1.0, 2.0, 3, 3, 1.0).is_err());
        assert!(MarketParams::new(1.0, 2.0, 3, 2, 0.0).is_err());
        assert!(MarketParams::new(1.0, 2.0, 3, 2, 1.5).is_err());
        assert!(MarketParams::new(1.0, 2.0, 0, 0, 1.0).is_err());
    }

    #[test]
    fn runs_compress_equal_neighbours() {
        let inst = Instance::new(vec![1.0, 1.0, 2.0, 1.0]);
        assert_eq!(inst.runs(), vec![(1.0, 2), (2.0, 1), (1.0, 1)]);
    }

    #[test]
    fn distribution_sorts_and_merges() {
        let d = WelfareDistribution::from_atoms(vec![(0.25, 3.0), (0.5, 1.0), (0.25, 3.0)]).unwrap();
        assert_eq!(d.atoms(), &[(0.5, 1.0), (0.5, 3.0)]);
        assert_eq!(d.mean(), 2.0);
        assert_eq!(d.cdf(2.0), 0.5);
        assert!(WelfareDistribution::from_atoms(vec![(0.5, 1.0)]).is_err());
        assert!(WelfareDistribution::<f64>::from_atoms(vec![]).is_err());
    }

    #[test]
    fn profile_rejects_broken_dominance() {
        let p = MarketParams { lower: 1.0, upper: 10.0, k: 2, delta_cap: 1, delta_risk: 1.0 };
        let lo = GridFn::from_samples(vec![1.0, 5.0]).unwrap();
        let hi = GridFn::from_samples(vec![2.0, 10.0]).unwrap();
        let err = PricingProfile::new(p, 2.0, vec![1, 1], vec![lo.clone(), hi.clone()]);
        assert!(err.is_err());
        let ok = PricingProfile::new(p, 2.0, vec![1, 1], vec![lo.clone(), GridFn::from_samples(vec![5.0, 10.0]).unwrap()]);
        assert!(ok.is_ok());
        assert!(PricingProfile::new(p, 2.0, vec![2, 1], vec![lo, hi]).is_err());
    }
}
