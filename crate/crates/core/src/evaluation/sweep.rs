//! Parameter sweeps behind the three figures.

use rayon::prelude::*;

use super::{hard_family_report, monte_carlo_runs, SeedResolution};
use crate::error::Result;
use crate::mechanism::Baselines;
use crate::model::{Instance, MarketParams};
use crate::pricing::{design, DesignMode, DesignRequest};
use crate::scalar::Scalar;

pub const FIG3_DELTAS: [f64; 3] = [0.2, 0.6, 0.9];
pub const FIG3_K: std::ops::RangeInclusive<usize> = 3..=100;
pub const FIG4_DELTAS: [f64; 3] = [0.2, 0.4, 0.8];
pub const FIG4_K: usize = 40;
pub const FIG_L: f64 = 1.0;
pub const FIG_U: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub grid_size: usize,
    /// Also evaluate each design on the staircase family with `lattice_steps`
    /// steps between `L` and `U`.
    pub ratio: Option<SeedResolution>,
    pub lattice_steps: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { grid_size: 4000, ratio: None, lattice_steps: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub k: usize,
    pub delta_cap: usize,
    pub delta_risk: T,
    pub alpha: Option<T>,
    pub worst_ratio: Option<T>,
    /// `ok`, or the error that stopped this row.
    pub status: String,
}

/// Fully dynamic designs, `δ`-major then `k`.
pub fn fig3_points<T: Scalar>() -> Vec<MarketParams<T>> {
    FIG3_DELTAS
        .iter()
        .flat_map(|&d| FIG3_K.map(move |k| MarketParams { lower: T::lit(FIG_L), upper: T::lit(FIG_U), k, delta_cap: k - 1, delta_risk: T::lit(d) }))
        .collect()
}

/// Δ-dynamic designs at `k = 40`, `δ`-major then `Δ = 1..=39`.
pub fn fig4_points<T: Scalar>() -> Vec<MarketParams<T>> {
    FIG4_DELTAS
        .iter()
        .flat_map(|&d| {
            (1..FIG4_K).map(move |cap| MarketParams {
                lower: T::lit(FIG_L),
                upper: T::lit(FIG_U),
                k: FIG4_K,
                delta_cap: cap,
                delta_risk: T::lit(d),
            })
        })
        .collect()
}

fn sweep_row<T: Scalar>(mode: DesignMode, p: MarketParams<T>, opts: &SweepOptions) -> SweepRow<T> {
    let mut row = SweepRow { k: p.k, delta_cap: p.delta_cap, delta_risk: p.delta_risk, alpha: None, worst_ratio: None, status: "ok".into() };
    let run = || -> Result<(T, Option<T>)> {
        let prof = design(mode, &DesignRequest::new(p).with_grid_size(opts.grid_size))?;
        let worst = match opts.ratio {
            Some(res) => {
                let eps = (p.upper - p.lower) / T::from_usize_exact(opts.lattice_steps.max(1));
                let eps = if eps > T::zero() { eps } else { T::one() };
                Some(hard_family_report(&prof, eps, p.delta_risk, res)?.worst)
            }
            None => None,
        };
        Ok((prof.alpha, worst))
    };
    match run() {
        Ok((a, w)) => {
            row.alpha = Some(a);
            row.worst_ratio = w;
        }
        Err(e) => row.status = e.to_string(),
    }
    row
}

/// Designs every point; a failing point is recorded in its row's status.
pub fn sweep<T: Scalar>(mode: DesignMode, points: &[MarketParams<T>], opts: &SweepOptions) -> Vec<SweepRow<T>> {
    points.par_iter().map(|&p| sweep_row(mode, p, opts)).collect()
}

pub fn sweep_fig3<T: Scalar>(opts: &SweepOptions) -> Vec<SweepRow<T>> {
    sweep(DesignMode::FullyDynamic, &fig3_points(), opts)
}

pub fn sweep_fig4<T: Scalar>(opts: &SweepOptions) -> Vec<SweepRow<T>> {
    sweep(DesignMode::DeltaDynamic, &fig4_points(), opts)
}

/// Stand-in market for the motivating comparison: ten units, prices in
/// `[1, 100]`, and ten buyers all valued at 10.
pub fn fig1_params<T: Scalar>() -> MarketParams<T> {
    MarketParams { lower: T::lit(FIG_L), upper: T::lit(FIG_U), k: 10, delta_cap: 0, delta_risk: T::one() }
}

pub fn fig1_instance<T: Scalar>() -> Instance<T> {
    Instance::new(vec![T::lit(10.0); 10])
}

pub const FIG1_ALGOS: [&str; 3] = ["r-static", "r-dynamic", "d-dynamic"];

/// `(algo, run, welfare)` for each baseline over `n_runs` runs.
pub fn fig1_runs<T: Scalar>(n_runs: usize, rng_seed: u64, grid_size: usize) -> Result<Vec<(&'static str, usize, T)>> {
    let params = fig1_params::<T>();
    let inst = fig1_instance::<T>();
    let b = Baselines::new(params, grid_size)?;
    let r_static = monte_carlo_runs(n_runs, 1, rng_seed, |s: &[T]| Ok(b.r_static(&inst, s[0])?.welfare))?;
    let r_dynamic = monte_carlo_runs(n_runs, params.k, rng_seed, |s: &[T]| Ok(b.r_dynamic(&inst, s)?.welfare))?;
    let d = b.d_dynamic(&inst)?.welfare;
    let mut rows = Vec::with_capacity(3 * n_runs);
    rows.extend(r_static.into_iter().enumerate().map(|(i, w)| (FIG1_ALGOS[0], i, w)));
    rows.extend(r_dynamic.into_iter().enumerate().map(|(i, w)| (FIG1_ALGOS[1], i, w)));
    rows.extend((0..n_runs).map(|i| (FIG1_ALGOS[2], i, d)));
    Ok(rows)
}
