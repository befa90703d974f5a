//! Sampling for mechanisms with more than one seed.
//!
//! Run `i` draws its seeds from ChaCha8 keyed by the user seed, on stream
//! `i`, so results do not depend on scheduling or on how many runs are taken.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::WelfareDistribution;
use crate::scalar::Scalar;

/// Welfare of each run, in run order. `runner` receives `seeds_per_run`
/// uniforms in `[0, 1)`.
pub fn monte_carlo_runs<T, F>(n_runs: usize, seeds_per_run: usize, rng_seed: u64, runner: F) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    if n_runs == 0 {
        return Err(Error::InvalidArgument("need at least one run".into()));
    }
    (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(run as u64);
            let seeds: Vec<T> = (0..seeds_per_run).map(|_| T::lit(rng.gen::<f64>())).collect();
            runner(&seeds)
        })
        .collect()
}

pub fn monte_carlo_distribution<T, F>(
    n_runs: usize,
    seeds_per_run: usize,
    rng_seed: u64,
    runner: F,
) -> Result<WelfareDistribution<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    WelfareDistribution::uniform(monte_carlo_runs(n_runs, seeds_per_run, rng_seed, runner)?)
}
