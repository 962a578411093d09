//! `norms`: mixed space-time norms of a stored trajectory, either a
//! run manifest or a list of NLSF snapshots in time order.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use nls_core::integrator::Trajectory;
use nls_core::norms::{mixed_norm, mixed_norm_raw, AdmissiblePair};
use nls_core::Field;

use crate::artifacts::{fmt_float, write_csv};
use crate::config::Config;
use crate::error::{HarnessError, Result};

/// What to measure: exponent pairs and whether to bypass the
/// admissibility check.
pub struct NormsRequest {
    pub files: Vec<PathBuf>,
    /// Empty means the default admissible set.
    pub pairs: Vec<(f64, f64)>,
    pub raw: bool,
}

/// One output row of `norms.csv`.
#[derive(Clone, Copy, Debug)]
pub struct NormRow {
    pub q: f64,
    pub r: f64,
    pub value: f64,
    pub horizon: f64,
}

/// The slice of a run manifest the norms command needs. Extra fields
/// are ignored so the manifest can grow without breaking readers.
#[derive(Deserialize)]
struct TrajectoryIndex {
    dt: f64,
    times: Vec<f64>,
    snapshots: Vec<String>,
}

/// Computes the requested norms and writes `norms.csv` under `out_dir`.
pub fn run(config: &Config, request: &NormsRequest, out_dir: &Path) -> Result<Vec<NormRow>> {
    let trajectory = load_trajectory(config, &request.files)?;

    let pairs: Vec<(f64, f64)> = if request.pairs.is_empty() {
        nls_core::norms::default_pairs()
            .iter()
            .map(|p| (p.q(), p.r()))
            .collect()
    } else {
        request.pairs.clone()
    };

    let mut rows = Vec::with_capacity(pairs.len());
    for &(q, r) in &pairs {
        let (value, horizon) = if request.raw {
            let value = mixed_norm_raw(&trajectory, q, r)?;
            let horizon = *trajectory.times().last().expect("trajectory is never empty");
            (value, horizon)
        } else {
            let report = mixed_norm(&trajectory, AdmissiblePair::new(q, r)?)?;
            (report.value, report.horizon)
        };
        rows.push(NormRow { q, r, value, horizon });
    }

    std::fs::create_dir_all(out_dir)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                fmt_float(row.q),
                fmt_float(row.r),
                fmt_float(row.value),
                fmt_float(row.horizon),
            ]
        })
        .collect();
    write_csv(&out_dir.join("norms.csv"), &["q", "r", "value", "horizon"], &csv_rows)?;
    Ok(rows)
}

/// Reassembles a trajectory from disk. A single `.json` argument is a
/// run manifest carrying exact times; bare NLSF files are assumed to be
/// `snapshot_stride` steps apart, starting at time zero.
fn load_trajectory(config: &Config, files: &[PathBuf]) -> Result<Trajectory> {
    if files.is_empty() {
        return Err(HarnessError::Config("norms: no trajectory files given".into()));
    }
    let manifest_args = files
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .count();
    if manifest_args > 0 && files.len() > 1 {
        return Err(HarnessError::Config(
            "norms: give one run manifest or only NLSF files".into(),
        ));
    }

    if manifest_args == 1 {
        let path = &files[0];
        let text = std::fs::read_to_string(path)?;
        let index: TrajectoryIndex = serde_json::from_str(&text).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{}: {e}", path.display()),
            )
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut snapshots = Vec::with_capacity(index.snapshots.len());
        for name in &index.snapshots {
            snapshots.push(Field::read_nlsf(&base.join(name))?);
        }
        return Ok(Trajectory::from_parts(index.times, snapshots, index.dt)?);
    }

    let step = config.step()?;
    let spacing = step.dt() * step.snapshot_stride() as f64;
    let mut snapshots = Vec::with_capacity(files.len());
    for path in files {
        snapshots.push(Field::read_nlsf(path)?);
    }
    let times = (0..snapshots.len()).map(|j| j as f64 * spacing).collect();
    Ok(Trajectory::from_parts(times, snapshots, step.dt())?)
}
