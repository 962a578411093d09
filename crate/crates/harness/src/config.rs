//! Flat dotted-key run configuration.
//!
//! A config file is UTF-8 text with one `key = value` assignment per
//! line. Blank lines and lines whose first non-space character is `#`
//! are skipped. Keys come from the table in [`KEYS`]; unknown and
//! duplicate keys are rejected so a typo cannot silently fall back to a
//! default. Values keep everything after the first `=`, trimmed, so
//! lists carry commas without quoting.
//!
//! A preset supplies a complete base map and the `--config` file is
//! overlaid on top, key by key. The canonical form of the merged map
//! (sorted `key = value` lines) is what run manifests hash, so two
//! files that differ only in comments or ordering produce the same
//! manifest hash.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use nls_core::averaging::TestFunction;
use nls_core::integrator::{EquationForm, StepConfig};
use nls_core::model::{BeamPath, Envelope, ModelParams, Profile, SofteningSpec};
use nls_core::nonlinearity::HartreeKernelSpec;
use nls_core::{Field, GridSpec, Space};

use crate::error::{HarnessError, Result};

/// Every key the harness understands, with its one-line meaning.
/// Parsing rejects anything not listed here.
pub const KEYS: &[(&str, &str)] = &[
    ("grid.dim", "spatial dimension, 1 to 3"),
    ("grid.extent", "per-axis box lengths; a single value broadcasts to every axis"),
    ("grid.points", "per-axis sample counts; a single value broadcasts to every axis"),
    ("model.c", "nucleus repulsion strength (default 0)"),
    ("model.c1", "Hartree self-interaction strength (default 0)"),
    ("model.a", "power-term strength (default 0)"),
    ("model.sigma", "power-term exponent in (0, 4) (default 1)"),
    ("model.global_certified", "true demands a mass-subcritical exponent, sigma < 4/3 (default false)"),
    ("path.envelope", "slow envelope family: constant, polynomial, or harmonic (default constant)"),
    ("path.amplitude", "constant-envelope vector (default 0, 0, 0)"),
    ("path.coefficients", "polynomial-envelope triples, lowest degree first, separated by semicolons"),
    ("path.e0", "harmonic-envelope offset vector (default 0, 0, 0)"),
    ("path.e1", "harmonic-envelope cosine amplitude vector (default 0, 0, 0)"),
    ("path.nu", "harmonic-envelope slow frequency (default 0)"),
    ("path.profile", "fast profile: sin, cos, or one (default sin)"),
    ("path.omega", "fast frequency, nonzero; sweep commands override it per run"),
    ("soft.delta", "soft-core length of the Coulomb regularization (default 0.2)"),
    ("soft.quad_points", "node count of the fast-period average, even, at least 8 (default 16)"),
    ("step.dt", "time step"),
    ("step.t_end", "final time; must be an integer number of steps"),
    ("step.snapshot_stride", "steps between stored snapshots (default 1)"),
    ("step.quad_nodes", "quadrature nodes per potential half step (default 8)"),
    ("step.form", "equation form: oscillating, averaged, or magnetic (default oscillating)"),
    ("step.dealias", "true applies the 2/3-rule spectral mask each step (default false)"),
    ("hartree.kernel", "Hartree kernel: auto, multiplier, or sampled (default auto)"),
    ("hartree.delta", "softening of the sampled Hartree kernel (default soft.delta)"),
    ("datum.kind", "initial datum: gaussian or file (default gaussian)"),
    ("datum.center", "Gaussian center (default 0, 0, 0)"),
    ("datum.width", "Gaussian width (default 1)"),
    ("datum.momentum", "Gaussian phase gradient (default 0, 0, 0)"),
    ("datum.file", "NLSF snapshot to start from when datum.kind = file"),
    ("output.dir", "artifact directory (default out); the --output flag wins"),
    ("seed", "echoed into manifests for any randomized diagnostics (default 0)"),
    ("sweep.omegas", "fast frequencies for sweep-omega and verify-averaging; at least 3, increasing"),
    ("avg.zeta", "averaging test function: gaussian, soft, or constant (default gaussian)"),
    ("avg.width", "width of the gaussian test function (default 1)"),
    ("avg.value", "value of the constant test function (default 1)"),
    ("avg.t_samples", "time-lattice points for the sup residual (default 64)"),
    ("avg.tau_nodes", "fast-period average nodes for the residuals, even, at least 8 (default 32)"),
];

/// Named base configurations compiled into the binary. The config file
/// overlays them, so a preset run needs only the keys it changes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// 1D fast suite: N=256 full model, minutes-scale sweeps.
    #[value(name = "ci-1d")]
    Ci1d,
    /// 3D 48-cubed preset for the headline runs.
    #[value(name = "desk-3d")]
    Desk3d,
}

impl Preset {
    pub fn text(self) -> &'static str {
        match self {
            Preset::Ci1d => PRESET_CI_1D,
            Preset::Desk3d => PRESET_DESK_3D,
        }
    }
}

const PRESET_CI_1D: &str = "\
# 1D fast suite: full model on a line, sized for minutes-scale sweeps.
grid.dim = 1
grid.extent = 16
grid.points = 256
model.c = 1
model.c1 = 1
model.a = 1
model.sigma = 0.6666666666666666
model.global_certified = true
path.envelope = constant
path.amplitude = 0.5, 0, 0
path.profile = sin
path.omega = 16
soft.delta = 0.3
soft.quad_points = 16
step.dt = 0.001
step.t_end = 1
step.snapshot_stride = 50
step.quad_nodes = 8
step.form = oscillating
datum.kind = gaussian
datum.center = 0, 0, 0
datum.width = 1
datum.momentum = 0, 0, 0
output.dir = out
seed = 1
sweep.omegas = 8, 16, 32, 64
avg.zeta = gaussian
avg.width = 1
avg.t_samples = 64
avg.tau_nodes = 32
";

const PRESET_DESK_3D: &str = "\
# 3D desk-scale preset: 48^3 full model in a box of side 8.
grid.dim = 3
grid.extent = 8
grid.points = 48
model.c = 1
model.c1 = 1
model.a = 1
model.sigma = 0.6666666666666666
model.global_certified = true
path.envelope = constant
path.amplitude = 0.5, 0, 0
path.profile = sin
path.omega = 32
soft.delta = 0.2
soft.quad_points = 16
step.dt = 0.001
step.t_end = 1
step.snapshot_stride = 100
step.quad_nodes = 8
step.form = oscillating
datum.kind = gaussian
datum.center = 0, 0, 0
datum.width = 1
datum.momentum = 0, 0, 0
output.dir = out
seed = 1
sweep.omegas = 8, 16, 32, 64
avg.zeta = gaussian
avg.width = 1
avg.t_samples = 64
avg.tau_nodes = 32
";

/// Initial state of a run: either a Gaussian wave packet or a stored
/// snapshot. Built against the run's grid on demand.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialDatum {
    Gaussian {
        center: [f64; 3],
        width: f64,
        momentum: [f64; 3],
    },
    FromFile(PathBuf),
}

impl InitialDatum {
    /// Materializes the datum on `grid`. A file datum must hold
    /// physical-space samples on the same grid and have finite mass.
    pub fn build(&self, grid: &GridSpec) -> Result<Field> {
        match self {
            InitialDatum::Gaussian { center, width, momentum } => {
                let dim = grid.dim();
                let inv = 0.5 / (width * width);
                Ok(Field::from_fn(*grid, |x| {
                    let mut s = 0.0;
                    let mut phase = 0.0;
                    for axis in 0..dim {
                        let d = x[axis] - center[axis];
                        s += d * d;
                        phase += momentum[axis] * x[axis];
                    }
                    Complex64::from_polar((-inv * s).exp(), phase)
                }))
            }
            InitialDatum::FromFile(path) => {
                let field = Field::read_nlsf(path)?;
                if field.space() != Space::Physical {
                    return Err(HarnessError::Config(format!(
                        "datum.file: {} holds spectral coefficients, expected physical samples",
                        path.display()
                    )));
                }
                if !field.grid().same_layout(grid) {
                    return Err(HarnessError::Config(format!(
                        "datum.file: snapshot grid does not match grid.* ({} points on axis 0 vs {})",
                        field.grid().points(0),
                        grid.points(0)
                    )));
                }
                if field.has_non_finite() {
                    return Err(HarnessError::Config(
                        "datum.file: datum must have finite mass".into(),
                    ));
                }
                Ok(field)
            }
        }
    }
}

/// Fully assembled run parameters, one per solver invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub model: ModelParams,
    pub path: BeamPath,
    pub soft: SofteningSpec,
    pub step: StepConfig,
    pub datum: InitialDatum,
    pub output_dir: PathBuf,
    pub seed: u64,
}

/// Test function and lattice controls for the averaging commands.
#[derive(Clone, Copy, Debug)]
pub struct AveragingSpec {
    pub zeta: TestFunction,
    pub t_samples: usize,
    pub tau_nodes: usize,
}

/// Parsed key-value map. Values stay raw strings; typed accessors parse
/// on demand and name the key in every failure.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Reads a config file, overlaying it on `preset` when one is given.
    /// An unreadable file is a config error, not an I/O error: the path
    /// came from the command line.
    pub fn load(path: &Path, preset: Option<Preset>) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("{}: {e}", path.display()))
        })?;
        Config::from_sources(preset, Some(&text))
    }

    /// Builds a config from the preset base and an optional overlay.
    /// Each source must be internally duplicate-free; the overlay wins
    /// on keys both define.
    pub fn from_sources(preset: Option<Preset>, overlay: Option<&str>) -> Result<Config> {
        let mut entries = BTreeMap::new();
        if let Some(p) = preset {
            parse_into(p.text(), &mut entries)?;
        }
        if let Some(text) = overlay {
            parse_into(text, &mut entries)?;
        }
        if entries.is_empty() {
            return Err(HarnessError::Config("no keys in config".into()));
        }
        Ok(Config { entries })
    }

    /// The merged key-value map, for manifest echoes.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Canonical serialization: sorted `key = value` lines. Comments
    /// and ordering of the source files do not survive, so the hash
    /// depends only on the effective configuration.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// Hex SHA-256 of the canonical text; the content hash recorded in
    /// every manifest.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn req(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| HarnessError::Config(format!("{key}: missing required key")))
    }

    fn parse_f64(key: &str, s: &str) -> Result<f64> {
        s.parse::<f64>().map_err(|_| {
            HarnessError::Config(format!("{key}: expected a number, got `{s}`"))
        })
    }

    fn parse_usize(key: &str, s: &str) -> Result<usize> {
        s.parse::<usize>().map_err(|_| {
            HarnessError::Config(format!("{key}: expected a nonnegative integer, got `{s}`"))
        })
    }

    pub fn req_f64(&self, key: &str) -> Result<f64> {
        Config::parse_f64(key, self.req(key)?)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            Some(s) => Config::parse_f64(key, s),
            None => Ok(default),
        }
    }

    pub fn req_usize(&self, key: &str) -> Result<usize> {
        Config::parse_usize(key, self.req(key)?)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            Some(s) => Config::parse_usize(key, s),
            None => Ok(default),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            Some(s) => s.parse::<u64>().map_err(|_| {
                HarnessError::Config(format!("{key}: expected a nonnegative integer, got `{s}`"))
            }),
            None => Ok(default),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(s) => Err(HarnessError::Config(format!(
                "{key}: expected true or false, got `{s}`"
            ))),
            None => Ok(default),
        }
    }

    fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).unwrap_or(default)
    }

    /// Comma-separated numbers, at least one.
    fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.req(key)?;
        raw.split(',')
            .map(|piece| Config::parse_f64(key, piece.trim()))
            .collect()
    }

    /// Up to three comma-separated components, padded with zeros.
    fn triple_or(&self, key: &str, default: [f64; 3]) -> Result<[f64; 3]> {
        let raw = match self.raw(key) {
            Some(s) => s,
            None => return Ok(default),
        };
        let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
        if parts.is_empty() || parts.len() > 3 {
            return Err(HarnessError::Config(format!(
                "{key}: expected 1 to 3 components, got {}",
                parts.len()
            )));
        }
        let mut out = [0.0; 3];
        for (i, piece) in parts.iter().enumerate() {
            out[i] = Config::parse_f64(key, piece)?;
        }
        Ok(out)
    }

    /// Per-axis list: either exactly `dim` values or a single value
    /// broadcast to every axis.
    fn axis_f64(&self, key: &str, dim: usize) -> Result<Vec<f64>> {
        let values = self.f64_list(key)?;
        match values.len() {
            1 => Ok(vec![values[0]; dim]),
            n if n == dim => Ok(values),
            n => Err(HarnessError::Config(format!(
                "{key}: expected 1 or {dim} values, got {n}"
            ))),
        }
    }

    fn axis_usize(&self, key: &str, dim: usize) -> Result<Vec<usize>> {
        let raw = self.req(key)?;
        let values: Vec<usize> = raw
            .split(',')
            .map(|piece| Config::parse_usize(key, piece.trim()))
            .collect::<Result<_>>()?;
        match values.len() {
            1 => Ok(vec![values[0]; dim]),
            n if n == dim => Ok(values),
            n => Err(HarnessError::Config(format!(
                "{key}: expected 1 or {dim} values, got {n}"
            ))),
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let dim = self.req_usize("grid.dim")?;
        if dim == 0 || dim > 3 {
            return Err(HarnessError::Config(format!(
                "grid.dim: must be 1 to 3, got {dim}"
            )));
        }
        let extent = self.axis_f64("grid.extent", dim)?;
        let points = self.axis_usize("grid.points", dim)?;
        Ok(GridSpec::new(&extent, &points)?)
    }

    pub fn model(&self) -> Result<ModelParams> {
        let model = ModelParams::new(
            self.f64_or("model.c", 0.0)?,
            self.f64_or("model.c1", 0.0)?,
            self.f64_or("model.a", 0.0)?,
            self.f64_or("model.sigma", 1.0)?,
        )?;
        if self.bool_or("model.global_certified", false)? && !model.is_mass_subcritical() {
            return Err(HarnessError::Config(format!(
                "model.sigma: global-in-time certification needs a mass-subcritical exponent, \
                 sigma < 4/3, got {}",
                model.sigma
            )));
        }
        Ok(model)
    }

    pub fn path(&self) -> Result<BeamPath> {
        let envelope = match self.str_or("path.envelope", "constant") {
            "constant" => Envelope::Constant(self.triple_or("path.amplitude", [0.0; 3])?),
            "polynomial" => {
                let raw = self.req("path.coefficients")?;
                let mut coeffs = Vec::new();
                for (degree, piece) in raw.split(';').enumerate() {
                    let parts: Vec<&str> = piece.split(',').map(str::trim).collect();
                    if parts.is_empty() || parts.len() > 3 {
                        return Err(HarnessError::Config(format!(
                            "path.coefficients: degree {degree} has {} components, expected 1 to 3",
                            parts.len()
                        )));
                    }
                    let mut c = [0.0; 3];
                    for (i, p) in parts.iter().enumerate() {
                        c[i] = Config::parse_f64("path.coefficients", p)?;
                    }
                    coeffs.push(c);
                }
                Envelope::Polynomial(coeffs)
            }
            "harmonic" => Envelope::Harmonic {
                e0: self.triple_or("path.e0", [0.0; 3])?,
                e1: self.triple_or("path.e1", [0.0; 3])?,
                nu: self.f64_or("path.nu", 0.0)?,
            },
            other => {
                return Err(HarnessError::Config(format!(
                    "path.envelope: expected constant, polynomial, or harmonic, got `{other}`"
                )))
            }
        };
        let profile = match self.str_or("path.profile", "sin") {
            "sin" => Profile::Sin,
            "cos" => Profile::Cos,
            "one" => Profile::One,
            other => {
                return Err(HarnessError::Config(format!(
                    "path.profile: expected sin, cos, or one, got `{other}`"
                )))
            }
        };
        Ok(BeamPath::new(envelope, profile, self.req_f64("path.omega")?)?)
    }

    pub fn soft(&self) -> Result<SofteningSpec> {
        Ok(SofteningSpec::new(
            self.f64_or("soft.delta", 0.2)?,
            self.usize_or("soft.quad_points", 16)?,
        )?)
    }

    pub fn step(&self) -> Result<StepConfig> {
        let form = match self.str_or("step.form", "oscillating") {
            "oscillating" => EquationForm::Oscillating,
            "averaged" => EquationForm::Averaged,
            "magnetic" => EquationForm::Magnetic,
            other => {
                return Err(HarnessError::Config(format!(
                    "step.form: expected oscillating, averaged, or magnetic, got `{other}`"
                )))
            }
        };
        let cfg = StepConfig::new(
            self.req_f64("step.dt")?,
            self.req_f64("step.t_end")?,
            self.usize_or("step.snapshot_stride", 1)?,
            self.usize_or("step.quad_nodes", 8)?,
            form,
        )?
        .with_dealias(self.bool_or("step.dealias", false)?);
        Ok(match self.str_or("hartree.kernel", "auto") {
            "auto" => cfg,
            "multiplier" => cfg.with_hartree_kernel(HartreeKernelSpec::FourierMultiplier3D),
            "sampled" => {
                let soft_delta = self.f64_or("soft.delta", 0.2)?;
                let delta_h = self.f64_or("hartree.delta", soft_delta)?;
                cfg.with_hartree_kernel(HartreeKernelSpec::SampledSoftKernel { delta_h })
            }
            other => {
                return Err(HarnessError::Config(format!(
                    "hartree.kernel: expected auto, multiplier, or sampled, got `{other}`"
                )))
            }
        })
    }

    pub fn datum(&self) -> Result<InitialDatum> {
        match self.str_or("datum.kind", "gaussian") {
            "gaussian" => {
                let width = self.f64_or("datum.width", 1.0)?;
                if !width.is_finite() || width <= 0.0 {
                    return Err(HarnessError::Config(format!(
                        "datum.width: must be finite and > 0, got {width}"
                    )));
                }
                Ok(InitialDatum::Gaussian {
                    center: self.triple_or("datum.center", [0.0; 3])?,
                    width,
                    momentum: self.triple_or("datum.momentum", [0.0; 3])?,
                })
            }
            "file" => Ok(InitialDatum::FromFile(PathBuf::from(self.req("datum.file")?))),
            other => Err(HarnessError::Config(format!(
                "datum.kind: expected gaussian or file, got `{other}`"
            ))),
        }
    }

    /// Artifact directory from the config alone; the `--output` flag
    /// takes precedence at the CLI layer.
    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(self.str_or("output.dir", "out"))
    }

    /// Assembles the full per-run parameter set. Sub-configs validate
    /// themselves, so this is where every field path surfaces.
    pub fn run_config(&self) -> Result<RunConfig> {
        Ok(RunConfig {
            grid: self.grid()?,
            model: self.model()?,
            path: self.path()?,
            soft: self.soft()?,
            step: self.step()?,
            datum: self.datum()?,
            output_dir: self.output_dir(),
            seed: self.u64_or("seed", 0)?,
        })
    }

    /// Sweep frequencies: at least three, strictly increasing, positive.
    pub fn sweep_omegas(&self) -> Result<Vec<f64>> {
        let omegas = self.f64_list("sweep.omegas")?;
        if omegas.len() < 3 {
            return Err(HarnessError::Config(format!(
                "sweep.omegas: need at least 3 frequencies, got {}",
                omegas.len()
            )));
        }
        for pair in omegas.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(HarnessError::Config(
                    "sweep.omegas: frequencies must increase strictly".into(),
                ));
            }
        }
        if omegas.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(HarnessError::Config(
                "sweep.omegas: frequencies must be finite and positive".into(),
            ));
        }
        Ok(omegas)
    }

    pub fn averaging(&self) -> Result<AveragingSpec> {
        let zeta = match self.str_or("avg.zeta", "gaussian") {
            "gaussian" => TestFunction::Gaussian {
                width: self.f64_or("avg.width", 1.0)?,
            },
            "soft" => TestFunction::SoftCoulomb {
                c: self.f64_or("model.c", 0.0)?,
                delta: self.f64_or("soft.delta", 0.2)?,
            },
            "constant" => TestFunction::Constant(self.f64_or("avg.value", 1.0)?),
            other => {
                return Err(HarnessError::Config(format!(
                    "avg.zeta: expected gaussian, soft, or constant, got `{other}`"
                )))
            }
        };
        Ok(AveragingSpec {
            zeta,
            t_samples: self.usize_or("avg.t_samples", 64)?,
            tau_nodes: self.usize_or("avg.tau_nodes", 32)?,
        })
    }
}

/// Parses one source into `entries`. Duplicates within a single source
/// are errors; overriding a key from an earlier source is the point of
/// the overlay, so cross-source repeats are allowed.
fn parse_into(text: &str, entries: &mut BTreeMap<String, String>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let number = index + 1;
        let (key, value) = line.split_once('=').ok_or_else(|| {
            HarnessError::Config(format!("line {number}: expected `key = value`"))
        })?;
        let key = key.trim();
        let value = value.trim();
        let well_formed = !key.is_empty()
            && key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.');
        if !well_formed {
            return Err(HarnessError::Config(format!(
                "line {number}: malformed key `{key}`"
            )));
        }
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(HarnessError::Config(format!(
                "line {number}: unknown key `{key}`"
            )));
        }
        if value.is_empty() {
            return Err(HarnessError::Config(format!(
                "line {number}: empty value for `{key}`"
            )));
        }
        if !seen.insert(key.to_string()) {
            return Err(HarnessError::Config(format!(
                "line {number}: duplicate key `{key}`"
            )));
        }
        entries.insert(key.to_string(), value.to_string());
    }
    Ok(())
}
