//! `verify-averaging`: measures the sup residual between the moving
//! potential's running time integral and its fast-period average across
//! a frequency sweep, then fits the decay rate.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use nls_core::averaging::{fit_rate, lemma_sup_residual, RateFitResult};

use crate::artifacts::{fmt_float, write_csv, write_json, SCHEMA_VERSION};
use crate::config::Config;
use crate::error::Result;

#[derive(Serialize)]
struct AveragingManifest {
    schema_version: u32,
    command: &'static str,
    config_hash: String,
    seed: u64,
    slope: f64,
    intercept: f64,
    n: usize,
    max_scaled_residual: f64,
    config: BTreeMap<String, String>,
}

/// Sweeps the residual over `sweep.omegas`, fits the log-log rate, and
/// writes `averaging.csv` (omega, residual) and `averaging.json` under
/// `out_dir`. The grid keys define the spatial lattice standing in for
/// the sup over all of space, and `step.t_end` sets the horizon.
pub fn run(config: &Config, out_dir: &Path, workers: usize) -> Result<RateFitResult> {
    let spec = config.averaging()?;
    let omegas = config.sweep_omegas()?;
    let path = config.path()?;
    let grid = config.grid()?;
    let t_end = config.req_f64("step.t_end")?;

    let pool = super::build_pool(workers)?;
    let residuals: Vec<Result<f64>> = pool.install(|| {
        omegas
            .par_iter()
            .map(|&omega| {
                lemma_sup_residual(
                    &path,
                    &spec.zeta,
                    omega,
                    t_end,
                    &grid,
                    spec.t_samples,
                    spec.tau_nodes,
                )
                .map_err(Into::into)
            })
            .collect()
    });
    let mut samples = Vec::with_capacity(omegas.len());
    for (&omega, residual) in omegas.iter().zip(residuals) {
        samples.push((omega, residual?));
    }
    let fit = fit_rate(&samples)?;

    std::fs::create_dir_all(out_dir)?;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|&(omega, residual)| vec![fmt_float(omega), fmt_float(residual)])
        .collect();
    write_csv(&out_dir.join("averaging.csv"), &["omega", "residual"], &rows)?;

    let manifest = AveragingManifest {
        schema_version: SCHEMA_VERSION,
        command: "verify-averaging",
        config_hash: config.content_hash(),
        seed: config.u64_or("seed", 0)?,
        slope: fit.slope,
        intercept: fit.intercept,
        n: samples.len(),
        max_scaled_residual: fit.max_scaled_residual,
        config: config.entries().clone(),
    };
    write_json(&out_dir.join("averaging.json"), &manifest)?;
    Ok(fit)
}
