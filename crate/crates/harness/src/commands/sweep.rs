//! `sweep-omega`: solves the averaged equation once, then the
//! oscillating equation for each sweep frequency, and tabulates the
//! mixed-norm distance between the runs for every default admissible
//! exponent pair.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use nls_core::averaging::fit_rate;
use nls_core::integrator::{solve, EquationForm, Trajectory};
use nls_core::model::BeamPath;
use nls_core::norms::{default_pairs, mixed_norm, AdmissiblePair};
use nls_core::Error as CoreError;

use crate::artifacts::{fmt_exponent, fmt_float, write_csv, write_json, SCHEMA_VERSION};
use crate::config::Config;
use crate::error::Result;

/// Sweep outcome: one row per frequency, one column per exponent pair.
/// A diverged run keeps its row with no norms so the frequency stays
/// visible in the table.
#[derive(Debug)]
pub struct SweepResult {
    pub omegas: Vec<f64>,
    pub pairs: Vec<AdmissiblePair>,
    /// `norms[i][p]` is the difference norm at `omegas[i]` for pair
    /// `pairs[p]`; `None` when that run diverged.
    pub norms: Vec<Vec<Option<f64>>>,
    pub diverged: Vec<bool>,
    /// Fitted log-log slope per pair; `None` when fewer than three
    /// frequencies produced positive norms.
    pub slopes: Vec<Option<f64>>,
    /// Identity of the shared reference trajectory.
    pub reference_id: &'static str,
    /// How many times the averaged equation was solved; one by
    /// construction, recorded so manifests can prove the sharing.
    pub averaged_solves: usize,
}

#[derive(Serialize)]
struct PairSummary {
    q: String,
    r: String,
    slope: Option<f64>,
    norms: Vec<Option<f64>>,
}

#[derive(Serialize)]
struct SweepManifest {
    schema_version: u32,
    command: &'static str,
    config_hash: String,
    seed: u64,
    reference: &'static str,
    averaged_solves: usize,
    omegas: Vec<f64>,
    diverged: Vec<bool>,
    pairs: Vec<PairSummary>,
    config: BTreeMap<String, String>,
}

/// Runs the sweep and writes `sweep.csv` and `sweep.json` under
/// `out_dir`. Diverged frequencies are marked and the sweep continues;
/// any other solver failure aborts.
pub fn run(config: &Config, out_dir: &Path, workers: usize) -> Result<SweepResult> {
    let run = config.run_config()?;
    let omegas = config.sweep_omegas()?;
    let datum = run.datum.build(&run.grid)?;

    // The comparison metric needs snapshots at matched times, which the
    // shared StepConfig guarantees; only the form differs between runs.
    let reference = solve(
        &datum,
        &run.step.with_form(EquationForm::Averaged),
        &run.model,
        &run.path,
        &run.soft,
    )?;
    let averaged_solves = 1;

    let pairs = default_pairs();
    let oscillating = run.step.with_form(EquationForm::Oscillating);
    let pool = super::build_pool(workers)?;
    let rows: Vec<Result<Option<Vec<f64>>>> = pool.install(|| {
        omegas
            .par_iter()
            .map(|&omega| sweep_point(omega, &datum, &reference, &pairs, &run, &oscillating))
            .collect()
    });

    let mut norms = Vec::with_capacity(omegas.len());
    let mut diverged = Vec::with_capacity(omegas.len());
    for row in rows {
        match row? {
            Some(values) => {
                norms.push(values.into_iter().map(Some).collect());
                diverged.push(false);
            }
            None => {
                norms.push(vec![None; pairs.len()]);
                diverged.push(true);
            }
        }
    }

    let slopes = fit_slopes(&omegas, &pairs, &norms);
    let result = SweepResult {
        omegas,
        pairs,
        norms,
        diverged,
        slopes,
        reference_id: "averaged",
        averaged_solves,
    };
    write_artifacts(config, &result, out_dir)?;
    Ok(result)
}

/// One oscillating run against the shared reference. Divergence is a
/// data point, not a failure; everything else propagates.
fn sweep_point(
    omega: f64,
    datum: &nls_core::Field,
    reference: &Trajectory,
    pairs: &[AdmissiblePair],
    run: &crate::config::RunConfig,
    step: &nls_core::integrator::StepConfig,
) -> Result<Option<Vec<f64>>> {
    let path = BeamPath::new(run.path.envelope.clone(), run.path.profile, omega)?;
    let solved = match solve(datum, step, &run.model, &path, &run.soft) {
        Ok(t) => t,
        Err(CoreError::Diverged { .. }) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let difference = solved.difference(reference)?;
    let mut values = Vec::with_capacity(pairs.len());
    for pair in pairs {
        values.push(mixed_norm(&difference, *pair)?.value);
    }
    Ok(Some(values))
}

/// Log-log fit per pair over the frequencies whose runs finished with a
/// positive norm. Degenerate columns (diverged, or exactly zero when
/// the two equations coincide) yield no slope.
fn fit_slopes(omegas: &[f64], pairs: &[AdmissiblePair], norms: &[Vec<Option<f64>>]) -> Vec<Option<f64>> {
    (0..pairs.len())
        .map(|p| {
            let samples: Vec<(f64, f64)> = omegas
                .iter()
                .zip(norms)
                .filter_map(|(&omega, row)| match row[p] {
                    Some(v) if v > 0.0 && v.is_finite() => Some((omega, v)),
                    _ => None,
                })
                .collect();
            if samples.len() < 3 {
                return None;
            }
            fit_rate(&samples).ok().map(|fit| fit.slope)
        })
        .collect()
}

fn write_artifacts(config: &Config, result: &SweepResult, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    for (i, &omega) in result.omegas.iter().enumerate() {
        for (p, pair) in result.pairs.iter().enumerate() {
            rows.push(vec![
                fmt_float(omega),
                fmt_float(pair.q()),
                fmt_float(pair.r()),
                fmt_float(result.norms[i][p].unwrap_or(f64::NAN)),
                result.diverged[i].to_string(),
            ]);
        }
    }
    write_csv(
        &out_dir.join("sweep.csv"),
        &["omega", "q", "r", "difference_norm", "diverged"],
        &rows,
    )?;

    let pair_summaries = result
        .pairs
        .iter()
        .enumerate()
        .map(|(p, pair)| PairSummary {
            q: fmt_exponent(pair.q()),
            r: fmt_exponent(pair.r()),
            slope: result.slopes[p],
            norms: result.norms.iter().map(|row| row[p]).collect(),
        })
        .collect();
    let manifest = SweepManifest {
        schema_version: SCHEMA_VERSION,
        command: "sweep-omega",
        config_hash: config.content_hash(),
        seed: config.u64_or("seed", 0)?,
        reference: result.reference_id,
        averaged_solves: result.averaged_solves,
        omegas: result.omegas.clone(),
        diverged: result.diverged.clone(),
        pairs: pair_summaries,
        config: config.entries().clone(),
    };
    write_json(&out_dir.join("sweep.json"), &manifest)
}

impl SweepResult {
    /// Difference norms for one pair across the sweep, skipping
    /// diverged entries. Convenience for monotonicity checks.
    pub fn pair_norms(&self, p: usize) -> Vec<(f64, f64)> {
        self.omegas
            .iter()
            .zip(&self.norms)
            .filter_map(|(&omega, row)| row[p].map(|v| (omega, v)))
            .collect()
    }
}
