//! Sampling, simulation campaigns and dataset assembly.

mod config;
mod dataset;
mod lhs;
mod scaler;

use rayon::prelude::*;

pub use config::CampaignConfig;
pub use dataset::{Dataset, DatasetScalers, SCHEMA_VERSION};
pub use lhs::{lhs_sample, lhs_unit, LhsDesign};
pub use scaler::{split_indices, Scaler, Split};

use crate::error::{Error, Result};
use crate::heat_source::ProcessParams;
use crate::seeds;
use crate::thermal::{run_simulation, GridSpec, MaterialProps, SimulationRecord};

/// Runs one simulation per sample; output order follows input order.
///
/// `workers <= 1` runs on the calling thread.
pub fn run_campaign(
    samples: &[ProcessParams],
    mat: &MaterialProps,
    grid: &GridSpec,
    workers: usize,
) -> Result<Vec<SimulationRecord>> {
    let one = |(index, pp): (usize, &ProcessParams)| {
        run_simulation(pp, mat, grid).map_err(|e| Error::Sample {
            index,
            source: Box::new(e),
        })
    };
    if workers <= 1 {
        return samples.iter().enumerate().map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<Result<SimulationRecord>> = pool.install(|| samples.par_iter().enumerate().map(one).collect());
    results.into_iter().collect()
}

/// Keeps melted records and returns how many were dropped.
pub fn filter_non_melting(records: Vec<SimulationRecord>) -> (Vec<SimulationRecord>, usize) {
    let total = records.len();
    let kept: Vec<SimulationRecord> = records.into_iter().filter(|r| r.melted).collect();
    let removed = total - kept.len();
    if kept.is_empty() && total > 0 {
        log::error!("none of the {total} simulated samples melted; the dataset is empty");
    } else if removed > 0 {
        log::info!("removed {removed} non-melting samples of {total}");
    }
    (kept, removed)
}

/// Sample, simulate, filter, split and standardize as configured.
pub fn generate(cfg: &CampaignConfig, workers: usize) -> Result<Dataset> {
    cfg.validate()?;
    let design = LhsDesign {
        n_samples: cfg.n_samples,
        bounds: cfg.bounds(),
        seed: seeds::derive(cfg.seed, seeds::stream::LHS),
    };
    let samples = lhs_sample(&design)?;
    let records = run_campaign(&samples, &cfg.material(), &cfg.grid(), workers)?;
    let (kept, removed) = filter_non_melting(records);
    Dataset::assemble(
        kept,
        removed,
        cfg.bounds(),
        cfg.grid(),
        cfg.material(),
        cfg.ratios(),
        seeds::derive(cfg.seed, seeds::stream::SPLIT),
    )
}
