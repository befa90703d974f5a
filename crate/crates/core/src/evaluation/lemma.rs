//! Exhaustive seed-grid checks of the structural properties of the mechanism.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanism::{run_cppm, run_fractional};
use crate::model::{Instance, PricingProfile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    /// Utilization after every buyer is nonincreasing in the seed.
    Monotonicity,
    /// Every seed sells at least the levels below the deepest level sold out
    /// at the seed with the largest utilization.
    Floor,
    /// Each buyer is served on a seed set at least as large as its fractional
    /// allocation (one unit per level only).
    Rounding,
}

impl Lemma {
    pub const ALL: [Lemma; 3] = [Lemma::Monotonicity, Lemma::Floor, Lemma::Rounding];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Monotonicity => "monotonicity",
            Lemma::Floor => "floor",
            Lemma::Rounding => "rounding",
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown lemma {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub passed: bool,
    /// Number of individual comparisons made.
    pub checks: usize,
    pub counterexample: Option<String>,
    /// Rounding only: buyers whose fractional share crosses a unit boundary,
    /// and those that stay within one unit.
    pub straddling: usize,
    pub within_unit: usize,
}

impl LemmaReport {
    fn new(lemma: Lemma, checks: usize, counterexample: Option<String>) -> Self {
        Self { lemma, passed: counterexample.is_none(), checks, counterexample, straddling: 0, within_unit: 0 }
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({} checks)", self.lemma, if self.passed { "pass" } else { "FAIL" }, self.checks)?;
        if let Some(c) = &self.counterexample {
            write!(f, ": {c}")?;
        }
        Ok(())
    }
}

/// Utilization after each buyer at seed `r`.
fn utilization<T: Scalar>(profile: &PricingProfile<T>, instance: &Instance<T>, r: T) -> Result<Vec<usize>> {
    let out = run_cppm(profile, instance, r)?;
    let mut y = 0;
    Ok(out.allocations.iter().map(|&x| { y += usize::from(x); y }).collect())
}

/// Checks one property on the seeds `i / (resolution - 1)` (rounding uses
/// the `resolution` cell midpoints and tolerance `2 / resolution`).
pub fn verify_lemma<T: Scalar>(
    profile: &PricingProfile<T>,
    instance: &Instance<T>,
    which: Lemma,
    resolution: usize,
) -> Result<LemmaReport> {
    if resolution < 2 {
        return Err(Error::InvalidArgument("resolution must be at least 2".into()));
    }
    match which {
        Lemma::Monotonicity => monotonicity(profile, instance, resolution),
        Lemma::Floor => floor(profile, instance, resolution),
        Lemma::Rounding => rounding(profile, instance, resolution),
    }
}

fn node<T: Scalar>(i: usize, resolution: usize) -> T {
    T::from_usize_exact(i) / T::from_usize_exact(resolution - 1)
}

fn monotonicity<T: Scalar>(profile: &PricingProfile<T>, instance: &Instance<T>, res: usize) -> Result<LemmaReport> {
    let paths = (0..res)
        .into_par_iter()
        .map(|i| utilization(profile, instance, node::<T>(i, res)))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = 0;
    for i in 1..res {
        for (t, (&lo, &hi)) in paths[i - 1].iter().zip(&paths[i]).enumerate() {
            checks += 1;
            if hi > lo {
                let msg = format!(
                    "buyer {}: y = {hi} at r = {} exceeds y = {lo} at r = {}",
                    t + 1,
                    node::<T>(i, res),
                    node::<T>(i - 1, res)
                );
                return Ok(LemmaReport::new(Lemma::Monotonicity, checks, Some(msg)));
            }
        }
    }
    Ok(LemmaReport::new(Lemma::Monotonicity, checks, None))
}

fn floor<T: Scalar>(profile: &PricingProfile<T>, instance: &Instance<T>, res: usize) -> Result<LemmaReport> {
    let finals = (0..res)
        .into_par_iter()
        .map(|i| Ok(utilization(profile, instance, node::<T>(i, res))?.last().copied().unwrap_or(0)))
        .collect::<Result<Vec<usize>>>()?;
    let (best, _) = finals.iter().enumerate().fold((0, 0), |acc, (i, &y)| if y > acc.1 { (i, y) } else { acc });
    let sold = run_cppm(profile, instance, node::<T>(best, res))?.units_by_level;
    let starts = profile.level_starts();
    let deepest = (0..profile.num_levels()).filter(|&j| profile.reservation[j] > 0 && sold[j] == profile.reservation[j]).max();
    let bound = deepest.map_or(0, |j| starts[j]);
    for (i, &y) in finals.iter().enumerate() {
        if y < bound {
            let msg = format!("r = {} sells {y} < {bound} units", node::<T>(i, res));
            return Ok(LemmaReport::new(Lemma::Floor, i + 1, Some(msg)));
        }
    }
    Ok(LemmaReport::new(Lemma::Floor, res, None))
}

fn rounding<T: Scalar>(profile: &PricingProfile<T>, instance: &Instance<T>, res: usize) -> Result<LemmaReport> {
    let trace = run_fractional(profile, instance)?;
    let rf = T::from_usize_exact(res);
    let served = (0..res)
        .into_par_iter()
        .map(|i| Ok(run_cppm(profile, instance, (T::from_usize_exact(i) + T::lit(0.5)) / rf)?.allocations))
        .collect::<Result<Vec<_>>>()?;
    let tol = T::lit(2.0) / rf;
    let mut report = LemmaReport::new(Lemma::Rounding, instance.len(), None);
    let mut before = T::zero();
    for t in 0..instance.len() {
        let after = trace.y_hat[t];
        if trace.x_hat[t] > T::zero() {
            if after.ceil() - before.floor() > T::one() {
                report.straddling += 1;
            } else {
                report.within_unit += 1;
            }
        }
        before = after;
        let share = T::from_usize_exact(served.iter().filter(|a| a[t]).count()) / rf;
        if report.passed && share < trace.x_hat[t] - tol {
            report.passed = false;
            report.counterexample =
                Some(format!("buyer {} served on {share} of seeds, fractional share {}", t + 1, trace.x_hat[t]));
        }
    }
    Ok(report)
}
