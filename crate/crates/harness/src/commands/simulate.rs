//! `simulate`: one solver run, persisted as NLSF snapshots, a mass
//! series, and a JSON run manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use nls_core::integrator::{solve, Trajectory};

use crate::artifacts::{fmt_float, write_csv, write_json, SCHEMA_VERSION};
use crate::config::Config;
use crate::error::Result;

/// Manifest written next to the snapshots. Paths are relative to the
/// manifest's directory so a run directory can be moved or compared
/// byte for byte against a rerun.
#[derive(Debug, Serialize)]
pub struct SimulateManifest {
    pub schema_version: u32,
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub dt: f64,
    pub final_time: f64,
    pub initial_mass: f64,
    pub mass_drift: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<String>,
    pub config: BTreeMap<String, String>,
}

pub struct SimulateOutcome {
    pub trajectory: Trajectory,
    pub manifest: SimulateManifest,
}

/// Solves the configured run and writes `run.json`, `mass.csv`, and
/// `snapshots/snap_NNNNNN.nlsf` under `out_dir`.
pub fn run(config: &Config, out_dir: &Path) -> Result<SimulateOutcome> {
    let run = config.run_config()?;
    let datum = run.datum.build(&run.grid)?;
    let trajectory = solve(&datum, &run.step, &run.model, &run.path, &run.soft)?;

    let snapshot_dir = out_dir.join("snapshots");
    std::fs::create_dir_all(&snapshot_dir)?;
    let mut names = Vec::with_capacity(trajectory.len());
    for (j, snapshot) in trajectory.snapshots().iter().enumerate() {
        let name = format!("snapshots/snap_{j:06}.nlsf");
        snapshot.write_nlsf(&out_dir.join(&name))?;
        names.push(name);
    }

    let mass_rows: Vec<Vec<String>> = trajectory
        .times()
        .iter()
        .zip(trajectory.mass_series())
        .map(|(&t, &m)| {
            let step = (t / trajectory.dt()).round() as u64;
            vec![step.to_string(), fmt_float(t), fmt_float(m), fmt_float(m.sqrt())]
        })
        .collect();
    write_csv(&out_dir.join("mass.csv"), &["step", "time", "mass", "l2norm"], &mass_rows)?;

    let manifest = SimulateManifest {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        config_hash: config.content_hash(),
        seed: run.seed,
        dt: trajectory.dt(),
        final_time: *trajectory.times().last().expect("trajectory is never empty"),
        initial_mass: trajectory.mass_series()[0],
        mass_drift: trajectory.mass_drift(),
        times: trajectory.times().to_vec(),
        snapshots: names,
        config: config.entries().clone(),
    };
    write_json(&out_dir.join("run.json"), &manifest)?;

    Ok(SimulateOutcome { trajectory, manifest })
}
