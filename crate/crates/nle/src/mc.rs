//! Chunk-parallel Monte Carlo. Chunks are scheduled by rayon but merged in
//! chunk order, so results equal the sequential estimator bit for bit.

use nle_core::montecarlo::{self, McEstimate, Sampler, SimConfig};
use nle_core::process::AdditiveModel;
use nle_core::Result;
use rayon::prelude::*;

pub fn estimate_expectations(
    model: &AdditiveModel,
    u0: &(dyn Fn(&[f64]) -> f64 + Sync),
    xs: &[Vec<f64>],
    t: f64,
    cfg: &SimConfig,
) -> Result<Vec<McEstimate>> {
    let sampler = Sampler::new(model, t, cfg)?;
    let f = montecarlo::probe_fn(u0, xs);
    let chunks = (0..cfg.chunks())
        .into_par_iter()
        .map(|c| montecarlo::run_chunk(&sampler, cfg, c, xs.len(), &f))
        .collect::<Result<Vec<_>>>()?;
    Ok(montecarlo::merge_chunks(&chunks).into_iter().map(McEstimate::from).collect())
}

/// Runs `f` on a pool with `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
