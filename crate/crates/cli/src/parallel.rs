//! Thread-parallel Monte Carlo. Replicates are pure functions of
//! `(seed, r)` and are collected in replicate order, so the result is the
//! same for every thread count.

use gbirthday_core::stats::{MonteCarlo, MonteCarloConfig};
use rayon::prelude::*;

pub fn monte_carlo_parallel(config: &MonteCarloConfig) -> gbirthday_core::Result<MonteCarlo> {
    config.validate()?;
    let values = (0..config.replicates)
        .into_par_iter()
        .map(|r| config.replicate(r))
        .collect::<gbirthday_core::Result<Vec<u64>>>()?;
    MonteCarlo::from_values(&values)
}

/// Runs `f` on a pool with `threads` workers (rayon's default when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()?;
    Ok(pool.install(f))
}
