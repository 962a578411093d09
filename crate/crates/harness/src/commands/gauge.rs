//! `verify-gauge`: runs the magnetic form and the gauge image of the
//! oscillating form from the same physical state and reports how far
//! the gauge map drifts between them over time.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use nls_core::integrator::{solve_magnetic_and_compare, GaugeComparison};

use crate::artifacts::{fmt_float, write_csv, write_json, SCHEMA_VERSION};
use crate::config::Config;
use crate::error::Result;

#[derive(Serialize)]
struct GaugeManifest {
    schema_version: u32,
    command: &'static str,
    config_hash: String,
    seed: u64,
    max_deviation: f64,
    final_time: f64,
    magnetic_mass_drift: f64,
    gauged_mass_drift: f64,
    config: BTreeMap<String, String>,
}

/// Runs the comparison and writes `gauge.csv` (deviation at every
/// snapshot time) and `gauge.json` under `out_dir`.
pub fn run(config: &Config, out_dir: &Path) -> Result<GaugeComparison> {
    let run = config.run_config()?;
    let datum = run.datum.build(&run.grid)?;
    let comparison =
        solve_magnetic_and_compare(&datum, &run.step, &run.model, &run.path, &run.soft)?;

    std::fs::create_dir_all(out_dir)?;
    let rows: Vec<Vec<String>> = comparison
        .magnetic
        .times()
        .iter()
        .zip(&comparison.deviations)
        .map(|(&t, &d)| vec![fmt_float(t), fmt_float(d)])
        .collect();
    write_csv(&out_dir.join("gauge.csv"), &["time", "deviation"], &rows)?;

    let manifest = GaugeManifest {
        schema_version: SCHEMA_VERSION,
        command: "verify-gauge",
        config_hash: config.content_hash(),
        seed: run.seed,
        max_deviation: comparison.max_deviation,
        final_time: *comparison.magnetic.times().last().expect("trajectory is never empty"),
        magnetic_mass_drift: comparison.magnetic.mass_drift(),
        gauged_mass_drift: comparison.gauged.mass_drift(),
        config: config.entries().clone(),
    };
    write_json(&out_dir.join("gauge.json"), &manifest)?;
    Ok(comparison)
}
