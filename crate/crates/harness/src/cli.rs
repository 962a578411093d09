//! Command-line surface of `nlsim` and the dispatch into the command
//! modules. Kept out of `main.rs` so tests can drive the exact CLI
//! paths in process.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::artifacts::parse_exponent;
use crate::commands::{averaging, gauge, norms, report, simulate, sweep};
use crate::config::{Config, Preset};
use crate::error::{HarnessError, Result};

#[derive(Parser)]
#[command(
    name = "nlsim",
    about = "Pseudospectral solver suite for a nonlinear Schrodinger model of an \
             electron beam in a rapidly oscillating Coulomb potential",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Config file of flat dotted keys, one `key = value` per line.
    #[arg(long)]
    pub config: PathBuf,

    /// Artifact directory; overrides the config's output.dir.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Worker threads for sweep points; 0 picks the machine default.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,

    /// Built-in base configuration the config file overlays.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Args)]
pub struct NormsArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Exponent pair as `q:r`, repeatable; `inf` is a valid q.
    /// Defaults to the four standard admissible pairs.
    #[arg(long = "pair")]
    pub pairs: Vec<String>,

    /// Accept exponent pairs outside the admissibility relation.
    #[arg(long)]
    pub raw: bool,

    /// One run manifest (run.json) or NLSF snapshot files in time order.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

#[derive(Subcommand)]
pub enum Command {
    /// One solver run: NLSF snapshots, mass CSV, and a run manifest.
    Simulate(CommonArgs),
    /// Difference norms against the shared averaged reference across
    /// the configured frequencies, with per-pair rate fits.
    SweepOmega(CommonArgs),
    /// Magnetic-frame run versus the gauge-mapped oscillating run.
    VerifyGauge(CommonArgs),
    /// Residual decay of the fast-period average across frequencies.
    VerifyAveraging(CommonArgs),
    /// Mixed space-time norms of a stored trajectory.
    Norms(NormsArgs),
    /// Text summary of the artifacts in an output directory.
    Report(CommonArgs),
}

impl CommonArgs {
    fn load(&self) -> Result<(Config, PathBuf)> {
        let config = Config::load(&self.config, self.preset)?;
        let out_dir = self.output.clone().unwrap_or_else(|| config.output_dir());
        Ok((config, out_dir))
    }
}

/// Runs one parsed invocation. Progress notes go to stderr so stdout
/// stays clean for `report`.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let (config, out_dir) = args.load()?;
            let outcome = simulate::run(&config, &out_dir)?;
            eprintln!(
                "simulate: {} snapshots, mass drift {:e}, wrote {}",
                outcome.trajectory.len(),
                outcome.trajectory.mass_drift(),
                out_dir.display()
            );
        }
        Command::SweepOmega(args) => {
            let (config, out_dir) = args.load()?;
            let result = sweep::run(&config, &out_dir, args.workers)?;
            let diverged = result.diverged.iter().filter(|d| **d).count();
            eprintln!(
                "sweep-omega: {} frequencies ({} diverged), wrote {}",
                result.omegas.len(),
                diverged,
                out_dir.display()
            );
        }
        Command::VerifyGauge(args) => {
            let (config, out_dir) = args.load()?;
            let comparison = gauge::run(&config, &out_dir)?;
            eprintln!(
                "verify-gauge: max deviation {:e}, wrote {}",
                comparison.max_deviation,
                out_dir.display()
            );
        }
        Command::VerifyAveraging(args) => {
            let (config, out_dir) = args.load()?;
            let fit = averaging::run(&config, &out_dir, args.workers)?;
            eprintln!(
                "verify-averaging: slope {:.3}, wrote {}",
                fit.slope,
                out_dir.display()
            );
        }
        Command::Norms(args) => {
            let (config, out_dir) = args.common.load()?;
            let pairs = args
                .pairs
                .iter()
                .map(|s| parse_pair(s))
                .collect::<Result<Vec<_>>>()?;
            let request = norms::NormsRequest { files: args.files.clone(), pairs, raw: args.raw };
            let rows = norms::run(&config, &request, &out_dir)?;
            eprintln!("norms: {} pairs, wrote {}", rows.len(), out_dir.display());
        }
        Command::Report(args) => {
            let (config, out_dir) = args.load()?;
            report::run(&config, &out_dir, &mut std::io::stdout().lock())?;
        }
    }
    Ok(())
}

/// `q:r` with `inf` allowed on either side.
fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let (q, r) = s
        .split_once(':')
        .ok_or_else(|| HarnessError::Config(format!("pair `{s}`: expected q:r")))?;
    let q = parse_exponent(q)
        .ok_or_else(|| HarnessError::Config(format!("pair `{s}`: bad exponent `{q}`")))?;
    let r = parse_exponent(r)
        .ok_or_else(|| HarnessError::Config(format!("pair `{s}`: bad exponent `{r}`")))?;
    Ok((q, r))
}
