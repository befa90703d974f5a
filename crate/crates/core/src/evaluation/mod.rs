//! Offline benchmark, welfare distributions over the seed, CVaR and
//! competitive-ratio reports, plus the lemma verifiers and figure sweeps.
//!
//! The mechanism's only randomness is the seed `R`, and welfare is piecewise
//! constant in `R`, so distributions are computed over seed cells rather than
//! sampled. Ratios are an empirical worst case over the instances supplied.

mod hard;
mod lemma;
mod montecarlo;
pub mod sweep;

pub use hard::{hard_family, hard_family_report, hard_instance, lattice_values};
pub use lemma::{verify_lemma, Lemma, LemmaReport};
pub use montecarlo::{monte_carlo_distribution, monte_carlo_runs};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanism::run_cppm;
use crate::model::{Instance, PricingProfile, WelfareDistribution};
use crate::scalar::Scalar;

/// Sum of the `k` largest valuations.
pub fn offline_opt<T: Scalar>(instance: &Instance<T>, k: usize) -> T {
    let mut v = instance.valuations.clone();
    let k = k.min(v.len());
    if k == 0 {
        return T::zero();
    }
    v.select_nth_unstable_by(k - 1, |a, b| b.partial_cmp(a).expect("finite valuations"));
    v[..k].iter().copied().sum()
}

/// How the seed interval is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedResolution {
    /// `M` equal cells, each evaluated at its midpoint.
    Grid(usize),
    /// Cells between consecutive acceptance thresholds `φ_j*(v)`, on which
    /// welfare is constant.
    Exact,
}

/// Welfare at the midpoint of each of `m_seeds` equal seed cells, in seed order.
pub fn seed_grid_welfare<T: Scalar>(
    profile: &PricingProfile<T>,
    instance: &Instance<T>,
    m_seeds: usize,
) -> Result<Vec<(T, T)>> {
    if m_seeds < 2 {
        return Err(Error::InvalidArgument("need at least two seed cells".into()));
    }
    let mf = T::from_usize_exact(m_seeds);
    (0..m_seeds)
        .into_par_iter()
        .map(|i| {
            let r = (T::from_usize_exact(i) + T::lit(0.5)) / mf;
            Ok((r, run_cppm(profile, instance, r)?.welfare))
        })
        .collect()
}

pub fn welfare_distribution<T: Scalar>(
    profile: &PricingProfile<T>,
    instance: &Instance<T>,
    m_seeds: usize,
) -> Result<WelfareDistribution<T>> {
    let w = T::one() / T::from_usize_exact(m_seeds.max(1));
    let rows = seed_grid_welfare(profile, instance, m_seeds)?;
    WelfareDistribution::from_atoms(rows.into_iter().map(|(_, x)| (w, x)).collect())
}

/// Seed cells `(midpoint, length)` on which every price comparison against
/// the given values is fixed.
pub(crate) fn exact_cells<T: Scalar>(profile: &PricingProfile<T>, values: &[T]) -> Vec<(T, T)> {
    let mut cuts = vec![T::zero(), T::one()];
    for f in &profile.levels {
        for &v in values {
            if let Some(x) = f.generalized_inverse(v) {
                cuts.push(x);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cut"));
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| ((w[0] + w[1]) * T::lit(0.5), w[1] - w[0]))
        .collect()
}

fn distinct_values<T: Scalar>(instance: &Instance<T>) -> Vec<T> {
    let mut v = instance.valuations.clone();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite valuations"));
    v.dedup();
    v
}

/// The welfare distribution without discretisation error.
pub fn exact_welfare_distribution<T: Scalar>(
    profile: &PricingProfile<T>,
    instance: &Instance<T>,
) -> Result<WelfareDistribution<T>> {
    let cells = exact_cells(profile, &distinct_values(instance));
    let atoms = cells
        .into_par_iter()
        .map(|(mid, len)| Ok((len, run_cppm(profile, instance, mid)?.welfare)))
        .collect::<Result<Vec<_>>>()?;
    WelfareDistribution::from_atoms(atoms)
}

pub fn distribution<T: Scalar>(
    profile: &PricingProfile<T>,
    instance: &Instance<T>,
    resolution: SeedResolution,
) -> Result<WelfareDistribution<T>> {
    match resolution {
        SeedResolution::Grid(m) => welfare_distribution(profile, instance, m),
        SeedResolution::Exact => exact_welfare_distribution(profile, instance),
    }
}

/// Mean of the worst `δ` fraction of outcomes; the boundary atom is split.
pub fn cvar<T: Scalar>(dist: &WelfareDistribution<T>, delta: T) -> Result<T> {
    if !(delta > T::zero() && delta <= T::one()) {
        return Err(Error::InvalidArgument(format!("delta {delta} outside (0, 1]")));
    }
    if delta == T::one() {
        return Ok(dist.mean());
    }
    let mut acc = T::zero();
    let mut sum = T::zero();
    for &(m, w) in dist.atoms() {
        let take = m.min(delta - acc);
        if take <= T::zero() {
            break;
        }
        sum = sum + take * w;
        acc = acc + take;
    }
    Ok(sum / delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow<T> {
    pub instance_id: String,
    pub opt: T,
    pub cvar: T,
    /// `opt / cvar`; infinite when the CVaR is zero.
    pub ratio: T,
}

/// Empirical worst case of `OPT / CVaR_δ` over a set of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport<T> {
    pub rows: Vec<RatioRow<T>>,
    pub worst: T,
    /// Ratio the profile was designed for.
    pub alpha: T,
    pub delta_risk: T,
}

impl<T: Scalar> RatioReport<T> {
    pub(crate) fn from_rows(rows: Vec<RatioRow<T>>, alpha: T, delta_risk: T) -> Self {
        let worst = rows.iter().map(|r| r.ratio).fold(T::neg_infinity(), T::max);
        Self { rows, worst, alpha, delta_risk }
    }

    /// Rows whose ratio exceeds `α·(1 + rel_tol)`.
    pub fn exceeding(&self, rel_tol: T) -> Vec<&RatioRow<T>> {
        let bound = self.alpha * (T::one() + rel_tol);
        self.rows.iter().filter(|r| r.ratio > bound).collect()
    }

    pub fn worst_row(&self) -> Option<&RatioRow<T>> {
        self.rows.iter().find(|r| r.ratio == self.worst)
    }
}

pub(crate) fn ratio_row<T: Scalar>(instance_id: String, opt: T, cvar: T) -> RatioRow<T> {
    let ratio = if cvar > T::zero() { opt / cvar } else { T::infinity() };
    RatioRow { instance_id, opt, cvar, ratio }
}

/// `OPT / CVaR_δ` for each instance, with the seed handled per `resolution`.
pub fn cvar_cr<T: Scalar>(
    profile: &PricingProfile<T>,
    instances: &[(String, Instance<T>)],
    delta_risk: T,
    resolution: SeedResolution,
) -> Result<RatioReport<T>> {
    if instances.is_empty() {
        return Err(Error::InvalidArgument("no instances to evaluate".into()));
    }
    let k = profile.params.k;
    let rows = instances
        .iter()
        .map(|(id, inst)| {
            let dist = distribution(profile, inst, resolution)?;
            Ok(ratio_row(id.clone(), offline_opt(inst, k), cvar(&dist, delta_risk)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioReport::from_rows(rows, profile.alpha, delta_risk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridFn;
    use crate::model::MarketParams;

    #[test]
    fn opt_examples() {
        assert_eq!(offline_opt(&Instance::new(vec![1.0, 5.0, 3.0]), 2), 8.0);
        assert_eq!(offline_opt(&Instance::new(vec![7.0]), 3), 7.0);
        assert_eq!(offline_opt(&Instance::<f64>::new(vec![]), 3), 0.0);
    }

    #[test]
    fn cvar_examples() {
        let d = WelfareDistribution::point(4.0);
        assert_eq!(cvar(&d, 0.3).unwrap(), 4.0);
        let d = WelfareDistribution::<f64>::from_atoms(vec![(0.25, 0.0), (0.75, 8.0)]).unwrap();
        assert!((cvar(&d, 0.5).unwrap() - 4.0).abs() < 1e-15);
        assert!((cvar(&d, 1.0).unwrap() - 6.0).abs() < 1e-15);
        assert!(cvar(&d, 0.0).is_err());
        assert!(cvar(&d, 1.5).is_err());
    }

    #[test]
    fn flat_profile_is_deterministic() {
        let p = MarketParams::<f64>::new(1.0, 10.0, 2, 0, 1.0).unwrap();
        let prof = PricingProfile::new(p, 1.0, vec![2], vec![GridFn::constant(10, 1.0)]).unwrap();
        let inst = Instance::new(vec![3.0, 4.0, 5.0]);
        let d = welfare_distribution(&prof, &inst, 7).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert!((d.mass_at(7.0) - 1.0).abs() < 1e-12);
        let e = exact_welfare_distribution(&prof, &inst).unwrap();
        assert_eq!(e.atoms(), &[(1.0, 7.0)]);
    }

    #[test]
    fn exact_distribution_matches_threshold() {
        // Δ = 0, one buyer at v: welfare v exactly on [0, φ*(v)]
        let p = MarketParams::<f64>::new(1.0, 3.0, 1, 0, 1.0).unwrap();
        let f = GridFn::from_fn(100, |x| 1.0 + 2.0 * x).unwrap();
        let prof = PricingProfile::new(p, 2.0, vec![1], vec![f]).unwrap();
        let d = exact_welfare_distribution(&prof, &Instance::new(vec![2.0])).unwrap();
        assert_eq!(d.atoms().len(), 2);
        assert!((d.mass_at(2.0) - 0.5).abs() < 1e-12);
        let g = welfare_distribution(&prof, &Instance::new(vec![2.0]), 1000).unwrap();
        assert!((g.mass_at(2.0) - 0.5).abs() <= 1e-3);
    }

    #[test]
    fn report_flags_and_infinite_ratio() {
        let rows = vec![ratio_row::<f64>("a".into(), 10.0, 5.0), ratio_row("b".into(), 3.0, 0.0)];
        let rep = RatioReport::from_rows(rows, 2.5, 1.0);
        assert!(rep.worst.is_infinite());
        assert_eq!(rep.exceeding(0.0).len(), 1);
        assert_eq!(rep.worst_row().unwrap().instance_id, "b");
    }
}
