//! The staircase family: `k` buyers at each lattice value `L, L+ε, …`,
//! truncated after the buyers at value `v`.

use rayon::prelude::*;

use super::{cvar, exact_cells, ratio_row, RatioReport, SeedResolution};
use crate::error::{Error, Result};
use crate::mechanism::run_cppm_runs;
use crate::model::{Instance, MarketParams, PricingProfile, WelfareDistribution};
use crate::scalar::Scalar;

/// `L, L+ε, …, L+⌊(U-L)/ε⌋ε`.
pub fn lattice_values<T: Scalar>(params: &MarketParams<T>, epsilon: T) -> Result<Vec<T>> {
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    let span = (params.upper - params.lower) / epsilon;
    let n = (span * (T::one() + T::lit(1e-12))).floor().to_usize().ok_or_else(|| {
        Error::InvalidArgument("lattice too fine".into())
    })?;
    Ok((0..=n)
        .map(|j| (params.lower + T::from_usize_exact(j) * epsilon).min(params.upper))
        .collect())
}

fn lattice_index<T: Scalar>(params: &MarketParams<T>, epsilon: T, v: T) -> Result<usize> {
    let values = lattice_values(params, epsilon)?;
    let j = ((v - params.lower) / epsilon).round();
    let tol = T::lit(1e-9) * params.upper.max(T::one());
    match j.to_usize() {
        Some(j) if j < values.len() && (values[j] - v).abs() <= tol => Ok(j),
        _ => Err(Error::InvalidArgument(format!("stop value {v} is not on the lattice L + j·{epsilon}"))),
    }
}

/// `k` copies of each lattice value from `L` up to `v`.
pub fn hard_instance<T: Scalar>(params: &MarketParams<T>, epsilon: T, stop_value: T) -> Result<Instance<T>> {
    let j = lattice_index(params, epsilon, stop_value)?;
    let values = lattice_values(params, epsilon)?;
    Ok(Instance::new(values[..=j].iter().flat_map(|&v| std::iter::repeat(v).take(params.k)).collect()))
}

/// Every truncation of the family, labelled `v=<value>`.
pub fn hard_family<T: Scalar>(params: &MarketParams<T>, epsilon: T) -> Result<Vec<(String, Instance<T>)>> {
    let values = lattice_values(params, epsilon)?;
    Ok((0..values.len())
        .map(|j| {
            let inst = values[..=j].iter().flat_map(|&v| std::iter::repeat(v).take(params.k)).collect();
            (format!("v={}", values[j]), Instance::new(inst))
        })
        .collect())
}

/// Ratio report over every truncation of the family.
///
/// Each seed cell is simulated once on the full staircase; the prefix
/// totals give the outcome of every truncation.
pub fn hard_family_report<T: Scalar>(
    profile: &PricingProfile<T>,
    epsilon: T,
    delta_risk: T,
    resolution: SeedResolution,
) -> Result<RatioReport<T>> {
    let params = &profile.params;
    let values = lattice_values(params, epsilon)?;
    let runs: Vec<(T, usize)> = values.iter().map(|&v| (v, params.k)).collect();
    let cells: Vec<(T, T)> = match resolution {
        SeedResolution::Grid(m) => {
            if m < 2 {
                return Err(Error::InvalidArgument("need at least two seed cells".into()));
            }
            let mf = T::from_usize_exact(m);
            (0..m).map(|i| ((T::from_usize_exact(i) + T::lit(0.5)) / mf, T::one() / mf)).collect()
        }
        SeedResolution::Exact => exact_cells(profile, &values),
    };
    let welfare: Vec<Vec<T>> = cells
        .par_iter()
        .map(|&(r, _)| {
            let mut w = vec![T::zero(); runs.len()];
            run_cppm_runs(profile, &runs, r, |i, t| w[i] = t.welfare);
            w
        })
        .collect();
    let rows = (0..values.len())
        .into_par_iter()
        .map(|j| {
            let atoms = cells.iter().zip(&welfare).map(|(&(_, len), w)| (len, w[j])).collect();
            let dist = WelfareDistribution::from_atoms(atoms)?;
            let opt = T::from_usize_exact(params.k) * values[j];
            Ok(ratio_row(format!("v={}", values[j]), opt, cvar(&dist, delta_risk)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioReport::from_rows(rows, profile.alpha, delta_risk))
}
