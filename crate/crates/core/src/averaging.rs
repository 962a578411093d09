//! Quantitative checks of the fast-oscillation averaging mechanism,
//! independent of the time stepper.
//!
//! Two residuals are measured for a test function `zeta` swept along a
//! beam path. The cube residual compares the space-time average of the
//! swept function against that of its fast-period mean over one box.
//! The sup residual follows the running time integral of the
//! difference pointwise in `x` and takes the worst value over a
//! lattice; for a sine profile it decays like `1/omega`, and the rate
//! fit certifies that slope from a frequency sweep.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::model::{BeamPath, Profile};
use crate::quadrature;

/// Smooth, bounded test functions with all derivatives bounded; the
/// class the sup-residual decay is stated for. `Constant` is the
/// degenerate member whose residuals vanish identically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestFunction {
    /// `exp(-|y|^2 / width^2)`.
    Gaussian { width: f64 },
    /// `c / sqrt(|y|^2 + delta^2)`, the potential's own profile.
    SoftCoulomb { c: f64, delta: f64 },
    Constant(f64),
}

impl TestFunction {
    pub fn eval(&self, y: [f64; 3]) -> f64 {
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        match self {
            TestFunction::Gaussian { width } => (-r2 / (width * width)).exp(),
            TestFunction::SoftCoulomb { c, delta } => c / (r2 + delta * delta).sqrt(),
            TestFunction::Constant(v) => *v,
        }
    }

    /// Length scale of the function's variation, used to pick spatial
    /// quadrature spacing.
    pub fn length_scale(&self) -> f64 {
        match self {
            TestFunction::Gaussian { width } => *width,
            TestFunction::SoftCoulomb { delta, .. } => *delta,
            TestFunction::Constant(_) => f64::INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            TestFunction::Gaussian { width } => width.is_finite() && *width > 0.0,
            TestFunction::SoftCoulomb { c, delta } => {
                c.is_finite() && delta.is_finite() && *delta > 0.0
            }
            TestFunction::Constant(v) => v.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("avg.zeta", format!("parameters out of domain: {self:?}")))
        }
    }
}

/// Axis-aligned box in `(t, x)` over which the cube residual averages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimeCube {
    t_start: f64,
    t_stop: f64,
    x_min: [f64; 3],
    x_max: [f64; 3],
    dim: usize,
}

impl SpaceTimeCube {
    pub fn new(t_range: (f64, f64), x_min: &[f64], x_max: &[f64]) -> Result<SpaceTimeCube> {
        let (t_start, t_stop) = t_range;
        if !t_start.is_finite() || !t_stop.is_finite() || !(t_stop > t_start) {
            return Err(Error::invalid(
                "cube.t_range",
                format!("must be a finite interval of positive length, got ({t_start}, {t_stop})"),
            ));
        }
        let dim = x_min.len();
        if dim == 0 || dim > 3 || x_max.len() != dim {
            return Err(Error::invalid(
                "cube.extent",
                format!("need matching bounds in 1 to 3 dimensions, got {} and {}", dim, x_max.len()),
            ));
        }
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for i in 0..dim {
            if !x_min[i].is_finite() || !x_max[i].is_finite() || !(x_max[i] > x_min[i]) {
                return Err(Error::invalid(
                    "cube.extent",
                    format!("axis {i} needs finite bounds with positive length"),
                ));
            }
            lo[i] = x_min[i];
            hi[i] = x_max[i];
        }
        Ok(SpaceTimeCube { t_start, t_stop, x_min: lo, x_max: hi, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn x_volume(&self) -> f64 {
        (0..self.dim).map(|i| self.x_max[i] - self.x_min[i]).product()
    }

    /// Tensor quadrature points and weights over the spatial box, with
    /// node spacing tied to the test function's length scale.
    fn quadrature_points(&self, scale: f64) -> Vec<([f64; 3], f64)> {
        let mut points: Vec<([f64; 3], f64)> = vec![([0.0; 3], 1.0)];
        for i in 0..self.dim {
            let length = self.x_max[i] - self.x_min[i];
            let spacing = (0.25 * scale).min(length);
            let (nodes, weights) = composite_axis(self.x_min[i], self.x_max[i], 8, spacing);
            let mut next = Vec::with_capacity(points.len() * nodes.len());
            for (x, w) in &points {
                for (n, nw) in nodes.iter().zip(&weights) {
                    let mut y = *x;
                    y[i] = *n;
                    next.push((y, w * nw));
                }
            }
            points = next;
        }
        points
    }
}

/// Least-squares fit of residual decay against frequency in log-log
/// coordinates, with the largest `residual * omega` product echoed for
/// reporting against the theoretical `1/omega` envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFitResult {
    pub omegas: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub max_scaled_residual: f64,
}

/// Composite Gauss-Legendre nodes and weights over `[a, b]` with the
/// average node spacing at or below `max_spacing`.
fn composite_axis(a: f64, b: f64, order: usize, max_spacing: f64) -> (Vec<f64>, Vec<f64>) {
    let panels = quadrature::panel_count(b - a, order, max_spacing);
    let (base_nodes, base_weights) = quadrature::gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + p as f64 * width + half;
        for (x, w) in base_nodes.iter().zip(&base_weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    (nodes, weights)
}

/// Fast-period mean `(1/m) sum_j zeta(x - e f(tau_j))` on the uniform
/// periodic lattice `tau_j = 2 pi j / m`; spectrally accurate for
/// smooth `zeta` because the integrand is periodic and analytic.
fn tau_average<F: Fn([f64; 3]) -> f64>(
    zeta: &F,
    e: [f64; 3],
    profile: Profile,
    x: [f64; 3],
    m: usize,
) -> f64 {
    let mut acc = 0.0;
    for j in 0..m {
        let f = profile.value(2.0 * std::f64::consts::PI * j as f64 / m as f64);
        acc += zeta([x[0] - e[0] * f, x[1] - e[1] * f, x[2] - e[2] * f]);
    }
    acc / m as f64
}

fn validate_tau_nodes(tau_nodes: usize) -> Result<()> {
    if tau_nodes < 8 || tau_nodes % 2 != 0 {
        return Err(Error::invalid(
            "avg.tau_nodes",
            format!("must be an even integer >= 8, got {tau_nodes}"),
        ));
    }
    Ok(())
}

/// Swaps the sweep frequency into a copy of the path.
fn with_omega(path: &BeamPath, omega: f64) -> Result<BeamPath> {
    BeamPath::new(path.envelope.clone(), path.profile, omega)
}

/// Difference between the space-time average of the swept test
/// function and of its fast-period mean over one box, by tensor
/// Gauss-Legendre with time nodes dense enough to resolve `omega`.
pub fn cube_average_residual(
    path: &BeamPath,
    zeta: &TestFunction,
    omega: f64,
    cube: &SpaceTimeCube,
    tau_nodes: usize,
) -> Result<f64> {
    zeta.validate()?;
    validate_tau_nodes(tau_nodes)?;
    let swept = with_omega(path, omega)?;
    // The fast-period mean of a constant is the constant, so the
    // residual integrand vanishes identically.
    if matches!(zeta, TestFunction::Constant(_)) {
        return Ok(0.0);
    }
    Ok(cube_residual_impl(&|y| zeta.eval(y), zeta.length_scale(), &swept, cube, tau_nodes))
}

fn cube_residual_impl<F: Fn([f64; 3]) -> f64>(
    zeta: &F,
    scale: f64,
    path: &BeamPath,
    cube: &SpaceTimeCube,
    tau_nodes: usize,
) -> f64 {
    let t_spacing = std::f64::consts::PI / (4.0 * path.fast_frequency());
    let (t_nodes, t_weights) = composite_axis(cube.t_start, cube.t_stop, 8, t_spacing);
    let points = cube.quadrature_points(scale);
    // A time-independent envelope makes the fast-period mean a pure
    // function of x, worth caching across all time nodes.
    let cached: Option<Vec<f64>> = path.envelope.is_time_independent().then(|| {
        let e = path.envelope.value(0.0);
        points
            .iter()
            .map(|(x, _)| tau_average(zeta, e, path.profile, *x, tau_nodes))
            .collect()
    });
    let mut total = 0.0;
    for (t, wt) in t_nodes.iter().zip(&t_weights) {
        let b = path.displacement(*t);
        let e = path.envelope.value(*t);
        for (i, (x, wx)) in points.iter().enumerate() {
            let swept = zeta([x[0] - b[0], x[1] - b[1], x[2] - b[2]]);
            let mean = match &cached {
                Some(values) => values[i],
                None => tau_average(zeta, e, path.profile, *x, tau_nodes),
            };
            total += wt * wx * (swept - mean);
        }
    }
    (total / ((cube.t_stop - cube.t_start) * cube.x_volume())).abs()
}

/// Worst value over a `(t, x)` lattice of the running time integral
/// `|int_0^t (zeta(x - b(s)) - mean_tau zeta(x - e(s) sin tau)) ds|`.
///
/// The statement this checks is specific to the sine profile, so any
/// other profile is rejected. The time lattice is uniform with
/// `t_samples` points on `[0, t_end]`; the spatial lattice is the
/// grid's own. The inner integral uses at least sixteen Gauss-Legendre
/// nodes per fast period.
pub fn lemma_sup_residual(
    path: &BeamPath,
    zeta: &TestFunction,
    omega: f64,
    t_end: f64,
    grid: &GridSpec,
    t_samples: usize,
    tau_nodes: usize,
) -> Result<f64> {
    zeta.validate()?;
    validate_tau_nodes(tau_nodes)?;
    if path.profile != Profile::Sin {
        return Err(Error::invalid("path.profile", "the sup residual is stated for the sine profile"));
    }
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(Error::invalid("avg.t_end", format!("must be finite and > 0, got {t_end}")));
    }
    if t_samples == 0 {
        return Err(Error::invalid("avg.t_samples", "must be >= 1"));
    }
    let swept = with_omega(path, omega)?;
    if matches!(zeta, TestFunction::Constant(_)) {
        return Ok(0.0);
    }
    Ok(lemma_residual_impl(&|y| zeta.eval(y), &swept, t_end, grid, t_samples, tau_nodes))
}

fn lemma_residual_impl<F: Fn([f64; 3]) -> f64>(
    zeta: &F,
    path: &BeamPath,
    t_end: f64,
    grid: &GridSpec,
    t_samples: usize,
    tau_nodes: usize,
) -> f64 {
    // A single lattice point t = 0 leaves only the empty integral.
    if t_samples < 2 {
        return 0.0;
    }
    let spacing = std::f64::consts::PI / (8.0 * path.fast_frequency());
    let lattice_step = t_end / (t_samples - 1) as f64;
    let static_envelope = path.envelope.is_time_independent();
    let mut worst = 0.0f64;
    for lin in 0..grid.len() {
        let x = grid.position(lin);
        let cached = static_envelope
            .then(|| tau_average(zeta, path.envelope.value(0.0), path.profile, x, tau_nodes));
        let integrand = |s: f64| {
            let b = path.displacement(s);
            let moved = zeta([x[0] - b[0], x[1] - b[1], x[2] - b[2]]);
            let mean = match cached {
                Some(v) => v,
                None => tau_average(zeta, path.envelope.value(s), path.profile, x, tau_nodes),
            };
            moved - mean
        };
        let mut running = 0.0;
        for j in 1..t_samples {
            let a = (j - 1) as f64 * lattice_step;
            let b = j as f64 * lattice_step;
            running += quadrature::integrate_composite(&integrand, a, b, 8, spacing);
            worst = worst.max(running.abs());
        }
    }
    worst
}

/// Least-squares line through `(log omega, log residual)`. Needs at
/// least three samples with increasing positive frequencies and
/// positive residuals.
pub fn fit_rate(samples: &[(f64, f64)]) -> Result<RateFitResult> {
    if samples.len() < 3 {
        return Err(Error::invalid("fit.samples", format!("need at least 3 samples, got {}", samples.len())));
    }
    for pair in samples.windows(2) {
        if !(pair[1].0 > pair[0].0) {
            return Err(Error::invalid("fit.samples", "frequencies must increase strictly"));
        }
    }
    for &(omega, residual) in samples {
        if !omega.is_finite() || omega <= 0.0 || !residual.is_finite() || residual <= 0.0 {
            return Err(Error::invalid(
                "fit.samples",
                format!("need positive finite entries, got ({omega}, {residual})"),
            ));
        }
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|(o, _)| o.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, r)| r.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let max_scaled_residual = samples.iter().map(|(o, r)| o * r).fold(0.0, f64::max);
    Ok(RateFitResult {
        omegas: samples.iter().map(|s| s.0).collect(),
        residuals: samples.iter().map(|s| s.1).collect(),
        slope,
        intercept,
        max_scaled_residual,
    })
}
