//! Thread-pool drivers. Replicates are mapped in parallel and reduced in
//! replicate order, so reports do not depend on the thread count.

use ctspec_core::mcstudy::{replicate_statistics, summarize, McConfig, McReport};
use ctspec_core::{Kernel, OuMixtureModel};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::CliResult;

/// Environment variable consulted when `--threads` is not given.
pub const THREADS_ENV: &str = "CTSPEC_THREADS";

/// Builds a pool with `threads` workers; `None` or `0` lets rayon choose.
pub fn thread_pool(threads: Option<usize>) -> CliResult<ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads.filter(|&t| t > 0) {
        builder = builder.num_threads(t);
    }
    Ok(builder.build()?)
}

/// Parallel counterpart of [`ctspec_core::mcstudy::run_study`].
pub fn run_study(cfg: &McConfig, model: &OuMixtureModel, pool: &ThreadPool) -> CliResult<McReport> {
    cfg.validate()?;
    let kernel = Kernel::by_name(&cfg.kernel)?;
    let per_replicate = pool.install(|| {
        (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|i| replicate_statistics(cfg, model, &kernel, i))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(summarize(&cfg.grid, &per_replicate, cfg.level)?)
}

/// Maps `f` over replicate indices `0..count` on `pool`, keeping index order.
pub fn map_replicates<T, F>(pool: &ThreadPool, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    pool.install(|| (0..count as u64).into_par_iter().map(f).collect())
}

/// Parallel counterpart of [`ctspec_core::estimate_cross_spectrum_with`],
/// splitting the grid across the pool.
pub fn estimate(
    samples: &ctspec_core::MultichannelSamples,
    kernel: &Kernel,
    b_n: f64,
    grid: &ctspec_core::FrequencyGrid,
    options: ctspec_core::estimator::EstimatorOptions,
    pool: &ThreadPool,
) -> CliResult<ctspec_core::SpectralEstimate> {
    let prepared = ctspec_core::estimator::LagWindowEstimator::new(samples, kernel, b_n, options)?;
    let matrices = pool.install(|| {
        grid.values()
            .par_iter()
            .map(|&l| prepared.matrix_at(l))
            .collect()
    });
    Ok(ctspec_core::SpectralEstimate::from_parts(
        grid.clone(),
        matrices,
        prepared.meta().clone(),
    )?)
}
