//! Strang split-step evolution of the beam equation.
//!
//! A step from `t` to `t + dt` applies half a step of the potential and
//! nonlinear phase, a full kinetic step in Fourier space, and a second
//! half phase refreshed from the post-kinetic state. Every substep is a
//! pointwise unimodular phase or a unitary transform pair, so the
//! discrete mass is conserved to rounding and the map is second order
//! in `dt` for smooth data. The one exception is the optional 2/3-rule
//! mask ([`StepConfig::with_dealias`]), a projection under which mass
//! is nonincreasing instead of conserved.
//!
//! The time average of the potential over each half interval is taken
//! by Gauss-Legendre quadrature. Every equation form flows through the
//! same per-node accumulation, and cached potential tables hold exactly
//! the values the direct evaluation would produce, so degenerate
//! configurations (a frozen beam, a vanishing vector potential) agree
//! with their static counterparts coefficient by coefficient.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::{GridSpec, WaveTable};
use crate::model::{self, BeamPath, GaugePhase, ModelParams, SofteningSpec};
use crate::nonlinearity::{HartreeKernelSpec, HartreeSolver};
use crate::quadrature;
use crate::spectral;

/// Which equation the stepper integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquationForm {
    /// Soft Coulomb centered on the instantaneous beam position.
    Oscillating,
    /// Fast-period average of the moving potential; no beam motion left.
    Averaged,
    /// Static potential at the origin with the kinetic symbol
    /// `|k + A(t)|^2`; the moving frame in disguise.
    Magnetic,
}

/// Time-stepping plan: step size, horizon, snapshot cadence, potential
/// quadrature order, and the equation form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig {
    dt: f64,
    t_end: f64,
    snapshot_stride: usize,
    potential_quad_nodes: usize,
    form: EquationForm,
    hartree_kernel: Option<HartreeKernelSpec>,
    dealias: bool,
    n_steps: usize,
}

impl StepConfig {
    /// Requires `0 < dt <= t_end`, `dt` dividing `t_end` to one part in
    /// 1e9, a positive stride, and at least two quadrature nodes.
    pub fn new(
        dt: f64,
        t_end: f64,
        snapshot_stride: usize,
        potential_quad_nodes: usize,
        form: EquationForm,
    ) -> Result<StepConfig> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::invalid("step.dt", format!("must be finite and > 0, got {dt}")));
        }
        if !t_end.is_finite() || t_end <= 0.0 {
            return Err(Error::invalid("step.t_end", format!("must be finite and > 0, got {t_end}")));
        }
        if snapshot_stride == 0 {
            return Err(Error::invalid("step.snapshot_stride", "must be >= 1"));
        }
        if potential_quad_nodes < 2 {
            return Err(Error::invalid(
                "step.potential_quad_nodes",
                format!("must be >= 2, got {potential_quad_nodes}"),
            ));
        }
        let ratio = t_end / dt;
        let rounded = ratio.round();
        if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::invalid(
                "step.dt",
                format!("must divide t_end = {t_end} into a whole number of steps, got {ratio} steps"),
            ));
        }
        if rounded > 1e9 {
            return Err(Error::invalid("step.dt", format!("asks for {rounded:.0} steps; limit is 1e9")));
        }
        Ok(StepConfig {
            dt,
            t_end,
            snapshot_stride,
            potential_quad_nodes,
            form,
            hartree_kernel: None,
            dealias: false,
            n_steps: rounded as usize,
        })
    }

    /// Overrides the Hartree kernel choice (the default picks the
    /// free-space multiplier in three dimensions and the sampled soft
    /// kernel below that).
    pub fn with_hartree_kernel(mut self, kernel: HartreeKernelSpec) -> StepConfig {
        self.hartree_kernel = Some(kernel);
        self
    }

    /// Same plan for a different equation form.
    pub fn with_form(mut self, form: EquationForm) -> StepConfig {
        self.form = form;
        self
    }

    /// Turns the 2/3-rule spectral mask on or off (off by default).
    /// With the mask on, each step zeroes every Fourier mode whose
    /// index exceeds two thirds of the axis Nyquist index, so mass is
    /// nonincreasing instead of conserved.
    pub fn with_dealias(mut self, dealias: bool) -> StepConfig {
        self.dealias = dealias;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn snapshot_stride(&self) -> usize {
        self.snapshot_stride
    }

    pub fn potential_quad_nodes(&self) -> usize {
        self.potential_quad_nodes
    }

    pub fn form(&self) -> EquationForm {
        self.form
    }

    pub fn hartree_kernel(&self) -> Option<HartreeKernelSpec> {
        self.hartree_kernel
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }
}

/// A stored run: snapshot times, states, and the mass at each snapshot.
/// `times[0]` is always zero and holds the initial datum.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    snapshots: Vec<Field>,
    mass_series: Vec<f64>,
    dt: f64,
}

impl Trajectory {
    /// Assembles a trajectory from raw parts. Times must start at zero
    /// and increase strictly; every snapshot must share one grid.
    pub fn from_parts(times: Vec<f64>, snapshots: Vec<Field>, dt: f64) -> Result<Trajectory> {
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(Error::invalid(
                "trajectory.times",
                format!("need matching nonempty times and snapshots, got {} and {}", times.len(), snapshots.len()),
            ));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::invalid("trajectory.dt", format!("must be finite and > 0, got {dt}")));
        }
        if times[0] != 0.0 {
            return Err(Error::invalid("trajectory.times", format!("must start at 0, got {}", times[0])));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("trajectory.times", "must increase strictly"));
        }
        let grid = *snapshots[0].grid();
        if snapshots.iter().any(|s| !s.grid().same_layout(&grid)) {
            return Err(Error::GridMismatch("trajectory snapshots must share one grid".into()));
        }
        let mass_series = snapshots.iter().map(Field::mass).collect();
        Ok(Trajectory { times, snapshots, mass_series, dt })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[Field] {
        &self.snapshots
    }

    pub fn snapshot(&self, j: usize) -> &Field {
        &self.snapshots[j]
    }

    pub fn final_snapshot(&self) -> &Field {
        self.snapshots.last().expect("trajectory is never empty")
    }

    /// Mass at each snapshot, aligned with [`Trajectory::times`].
    pub fn mass_series(&self) -> &[f64] {
        &self.mass_series
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest drift of the mass from its initial value over the run.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass_series[0];
        self.mass_series.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max)
    }

    /// Snapshot-wise difference `self - other`; the runs must share
    /// their snapshot times, grid, and space exactly.
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times.len() != other.times.len()
            || self.times.iter().zip(&other.times).any(|(a, b)| a.to_bits() != b.to_bits())
        {
            return Err(Error::invalid("trajectory.times", "runs record different snapshot times"));
        }
        let mut snapshots = Vec::with_capacity(self.snapshots.len());
        for (a, b) in self.snapshots.iter().zip(&other.snapshots) {
            if !a.grid().same_layout(b.grid()) {
                return Err(Error::GridMismatch("trajectory difference needs one grid".into()));
            }
            a.require_space(b.space())?;
            let values = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
            snapshots.push(Field::from_values(*a.grid(), a.space(), values)?);
        }
        let mass_series = snapshots.iter().map(Field::mass).collect();
        Ok(Trajectory {
            times: self.times.clone(),
            snapshots,
            mass_series,
            dt: self.dt,
        })
    }
}

/// Result of running the magnetic form and its translated-frame twin
/// side by side.
#[derive(Clone, Debug)]
pub struct GaugeComparison {
    /// Run of the magnetic form (static potential, `|k + A|^2` symbol).
    pub magnetic: Trajectory,
    /// Run of the oscillating form started from the mapped datum.
    pub gauged: Trajectory,
    /// L2 distance at each snapshot between the magnetic state and the
    /// gauge image of the oscillating state.
    pub deviations: Vec<f64>,
    /// Largest entry of `deviations`.
    pub max_deviation: f64,
}

/// L2 distance between two fields on the same grid and in the same
/// space, under the same normalization as [`Field::l2_norm`].
pub fn l2_distance(a: &Field, b: &Field) -> Result<f64> {
    if !a.grid().same_layout(b.grid()) {
        return Err(Error::GridMismatch("distance needs matching grids".into()));
    }
    a.require_space(b.space())?;
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    let scale = match a.space() {
        Space::Physical => a.grid().cell_volume(),
        Space::Fourier => a.grid().cell_volume() / a.grid().len() as f64,
    };
    Ok((scale * sum).sqrt())
}

/// Everything a step needs, built once per run: quadrature nodes, the
/// coordinate lines, and whatever the chosen form lets us cache (the
/// kinetic table when `A` is absent, the potential samples when the
/// potential is static, the Hartree solver when `c1 > 0`).
struct Engine {
    grid: GridSpec,
    waves: WaveTable,
    model: ModelParams,
    path: BeamPath,
    soft: SofteningSpec,
    cfg: StepConfig,
    coords: Vec<Vec<f64>>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    hartree: Option<HartreeSolver>,
    static_v: Option<Vec<f64>>,
    kinetic: Option<Vec<Complex64>>,
    dealias: Option<Vec<bool>>,
}

impl Engine {
    fn new(
        grid: GridSpec,
        cfg: StepConfig,
        model: ModelParams,
        path: &BeamPath,
        soft: SofteningSpec,
    ) -> Result<Engine> {
        if !path.is_confined_to(grid.dim()) {
            return Err(Error::invalid(
                "path.envelope",
                format!("components beyond the grid dimension {} must vanish", grid.dim()),
            ));
        }
        // The oscillating potential sweeps a phase of about omega*dt per
        // step; the node count must keep that resolved.
        if cfg.form == EquationForm::Oscillating && model.c != 0.0 {
            let sweep = path.fast_frequency() * cfg.dt;
            let needed = sweep.ceil().max(4.0) as usize;
            if cfg.potential_quad_nodes < needed {
                return Err(Error::invalid(
                    "step.potential_quad_nodes",
                    format!(
                        "oscillating potential advances {sweep:.2} radians per step; \
                         needs at least {needed} nodes, got {}",
                        cfg.potential_quad_nodes
                    ),
                ));
            }
        }
        let waves = WaveTable::new(&grid);
        let coords = (0..grid.dim()).map(|a| grid.coords(a)).collect();
        let (nodes, weights) = quadrature::gauss_legendre(cfg.potential_quad_nodes);
        let hartree = if model.c1 != 0.0 {
            let spec = cfg.hartree_kernel.unwrap_or(if grid.dim() == 3 {
                HartreeKernelSpec::FourierMultiplier3D
            } else {
                HartreeKernelSpec::SampledSoftKernel { delta_h: soft.delta }
            });
            Some(HartreeSolver::new(&grid, &spec)?)
        } else {
            None
        };
        let static_v = match cfg.form {
            EquationForm::Magnetic if model.c != 0.0 => Some(real_samples(
                &model::soft_coulomb(model.c, &[0.0; 3], soft.delta, &grid),
            )),
            EquationForm::Averaged if model.c != 0.0 && path.envelope.is_time_independent() => {
                Some(real_samples(&model::averaged_potential(&model, path, &soft, 0.0, &grid)))
            }
            _ => None,
        };
        let kinetic = match cfg.form {
            EquationForm::Magnetic => None,
            _ => Some(kinetic_table(&grid, &waves, [0.0; 3], cfg.dt)),
        };
        let dealias = cfg.dealias.then(|| dealias_mask(&grid, &waves));
        Ok(Engine {
            grid,
            waves,
            model,
            path: path.clone(),
            soft,
            cfg,
            coords,
            nodes,
            weights,
            hartree,
            static_v,
            kinetic,
            dealias,
        })
    }

    /// One full step `t -> t + dt`, in place. `coeff` is scratch of
    /// grid length.
    fn advance(&self, u: &mut Field, t: f64, coeff: &mut [f64]) -> Result<()> {
        let dt = self.cfg.dt;
        self.half_phase(u, t, coeff)?;
        spectral::forward_transform_in_place(u)?;
        match &self.kinetic {
            Some(table) => multiply_values(u.values_mut(), table),
            None => {
                let a = self.path.vector_potential(t + 0.5 * dt);
                let table = kinetic_table(&self.grid, &self.waves, a, dt);
                multiply_values(u.values_mut(), &table);
            }
        }
        if let Some(keep) = &self.dealias {
            for (v, &k) in u.values_mut().iter_mut().zip(keep) {
                if !k {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        spectral::inverse_transform_in_place(u)?;
        self.half_phase(u, t + 0.5 * dt, coeff)?;
        Ok(())
    }

    /// Applies `exp(-i P)` with `P = int_{t0}^{t0+dt/2} V dt` plus the
    /// nonlinear coefficients frozen at the current state.
    fn half_phase(&self, u: &mut Field, t0: f64, coeff: &mut [f64]) -> Result<()> {
        coeff.fill(0.0);
        if self.model.c != 0.0 {
            self.accumulate_potential(t0, coeff);
        }
        self.add_nonlinear(u, coeff)?;
        for (v, &p) in u.values_mut().iter_mut().zip(coeff.iter()) {
            *v *= Complex64::from_polar(1.0, -p);
        }
        Ok(())
    }

    /// Gauss-Legendre in time of the potential over `[t0, t0 + dt/2]`,
    /// added to `coeff`. Every form runs the same node loop; static
    /// forms read their cached samples through it, so a frozen beam and
    /// the static potential accumulate identical coefficients.
    fn accumulate_potential(&self, t0: f64, coeff: &mut [f64]) {
        let half = 0.25 * self.cfg.dt;
        let mid = t0 + half;
        for (node, weight) in self.nodes.iter().zip(&self.weights) {
            let w = half * weight;
            match &self.static_v {
                Some(table) => {
                    for (dst, &v) in coeff.iter_mut().zip(table) {
                        *dst += w * v;
                    }
                }
                None => match self.cfg.form {
                    EquationForm::Oscillating => {
                        let tq = mid + half * node;
                        let b = self.path.displacement(tq);
                        self.add_soft_coulomb(coeff, &b, w);
                    }
                    EquationForm::Averaged => {
                        let tq = mid + half * node;
                        let field =
                            model::averaged_potential(&self.model, &self.path, &self.soft, tq, &self.grid);
                        for (dst, v) in coeff.iter_mut().zip(field.values()) {
                            *dst += w * v.re;
                        }
                    }
                    // The magnetic potential is static, so its samples
                    // are always cached when c is nonzero.
                    EquationForm::Magnetic => unreachable!("magnetic potential is cached"),
                },
            }
        }
    }

    /// Adds `w * c / sqrt(|x - b|^2 + delta^2)` at every grid point,
    /// with the same association order as the sampled potentials so the
    /// inline path reproduces their values bit for bit.
    fn add_soft_coulomb(&self, coeff: &mut [f64], b: &[f64; 3], w: f64) {
        let c = self.model.c;
        let d2 = self.soft.delta * self.soft.delta;
        let xs = &self.coords[0];
        match self.grid.dim() {
            1 => {
                for (dst, &x0) in coeff.iter_mut().zip(xs) {
                    let dx0 = x0 - b[0];
                    let r2 = d2 + dx0 * dx0;
                    *dst += w * (c / r2.sqrt());
                }
            }
            2 => {
                let ys = &self.coords[1];
                let mut i = 0;
                for &x0 in xs {
                    let dx0 = x0 - b[0];
                    let s0 = d2 + dx0 * dx0;
                    for &x1 in ys {
                        let dx1 = x1 - b[1];
                        let r2 = s0 + dx1 * dx1;
                        coeff[i] += w * (c / r2.sqrt());
                        i += 1;
                    }
                }
            }
            _ => {
                let ys = &self.coords[1];
                let zs = &self.coords[2];
                let mut i = 0;
                for &x0 in xs {
                    let dx0 = x0 - b[0];
                    let s0 = d2 + dx0 * dx0;
                    for &x1 in ys {
                        let dx1 = x1 - b[1];
                        let s1 = s0 + dx1 * dx1;
                        for &x2 in zs {
                            let dx2 = x2 - b[2];
                            let r2 = s1 + dx2 * dx2;
                            coeff[i] += w * (c / r2.sqrt());
                            i += 1;
                        }
                    }
                }
            }
        }
    }

    /// Adds the Hartree and power coefficients for half a step, frozen
    /// at the current state.
    fn add_nonlinear(&self, u: &Field, coeff: &mut [f64]) -> Result<()> {
        let halfdt = 0.5 * self.cfg.dt;
        if let Some(solver) = &self.hartree {
            let phi = solver.potential(u)?;
            let scale = halfdt * self.model.c1;
            for (dst, p) in coeff.iter_mut().zip(phi.values()) {
                *dst += scale * p.re;
            }
        }
        if self.model.a != 0.0 {
            let scale = halfdt * self.model.a;
            let exponent = 0.5 * self.model.sigma;
            for (dst, v) in coeff.iter_mut().zip(u.values()) {
                let amp = v.norm_sqr();
                if amp > 0.0 {
                    *dst -= scale * amp.powf(exponent);
                }
            }
        }
        Ok(())
    }
}

/// Table of `exp(-i |k + a|^2 dt)` over the grid's modes. The shifted
/// symbol is used even for `a = 0`, so a vanishing vector potential
/// reproduces the free table bit for bit.
fn kinetic_table(grid: &GridSpec, waves: &WaveTable, a: [f64; 3], dt: f64) -> Vec<Complex64> {
    let phase = |s0: f64, s1: f64, s2: f64| {
        let sq = s0 * s0 + s1 * s1 + s2 * s2;
        Complex64::from_polar(1.0, -sq * dt)
    };
    let mut out = Vec::with_capacity(grid.len());
    let kx = waves.axis(0);
    match grid.dim() {
        1 => {
            for &k0 in kx {
                out.push(phase(k0 + a[0], a[1], a[2]));
            }
        }
        2 => {
            let ky = waves.axis(1);
            for &k0 in kx {
                for &k1 in ky {
                    out.push(phase(k0 + a[0], k1 + a[1], a[2]));
                }
            }
        }
        _ => {
            let ky = waves.axis(1);
            let kz = waves.axis(2);
            for &k0 in kx {
                for &k1 in ky {
                    for &k2 in kz {
                        out.push(phase(k0 + a[0], k1 + a[1], k2 + a[2]));
                    }
                }
            }
        }
    }
    out
}

fn multiply_values(values: &mut [Complex64], table: &[Complex64]) {
    for (v, m) in values.iter_mut().zip(table) {
        *v *= m;
    }
}

/// Per-mode keep flags for the 2/3-rule mask: a mode survives when its
/// integer index `m` obeys `3 |m| <= N` on every axis. The index comes
/// back from the wavenumber `k = 2 pi m / L` exactly, so the cutoff is
/// an integer comparison, not a float one.
fn dealias_mask(grid: &GridSpec, waves: &WaveTable) -> Vec<bool> {
    let axis_keep = |axis: usize| -> Vec<bool> {
        let n = grid.points(axis) as i64;
        let scale = grid.extent(axis) / (2.0 * std::f64::consts::PI);
        waves
            .axis(axis)
            .iter()
            .map(|&k| {
                let m = (k * scale).round() as i64;
                3 * m.abs() <= n
            })
            .collect()
    };
    let keep0 = axis_keep(0);
    let mut out = Vec::with_capacity(grid.len());
    match grid.dim() {
        1 => return keep0,
        2 => {
            let keep1 = axis_keep(1);
            for &a in &keep0 {
                for &b in &keep1 {
                    out.push(a && b);
                }
            }
        }
        _ => {
            let keep1 = axis_keep(1);
            let keep2 = axis_keep(2);
            for &a in &keep0 {
                for &b in &keep1 {
                    for &c in &keep2 {
                        out.push(a && b && c);
                    }
                }
            }
        }
    }
    out
}

fn real_samples(f: &Field) -> Vec<f64> {
    f.values().iter().map(|v| v.re).collect()
}

/// One Strang step of the configured equation starting at time `t`.
pub fn step(
    u: &Field,
    t: f64,
    cfg: &StepConfig,
    model: &ModelParams,
    path: &BeamPath,
    soft: &SofteningSpec,
) -> Result<Field> {
    u.require_space(Space::Physical)?;
    let engine = Engine::new(*u.grid(), *cfg, *model, path, *soft)?;
    let mut out = u.clone();
    let mut coeff = vec![0.0; out.values().len()];
    engine.advance(&mut out, t, &mut coeff)?;
    if !out.mass().is_finite() {
        return Err(Error::Diverged { step: 0, time: t + cfg.dt });
    }
    Ok(out)
}

/// Integrates from the datum to `t_end`, recording a snapshot every
/// `snapshot_stride` steps and at the final time. The datum itself is
/// snapshot zero. A non-finite mass aborts with the failing step.
pub fn solve(
    u0: &Field,
    cfg: &StepConfig,
    model: &ModelParams,
    path: &BeamPath,
    soft: &SofteningSpec,
) -> Result<Trajectory> {
    u0.require_space(Space::Physical)?;
    if u0.has_non_finite() {
        return Err(Error::invalid("state.values", "initial datum must be finite"));
    }
    let engine = Engine::new(*u0.grid(), *cfg, *model, path, *soft)?;
    let mut u = u0.clone();
    let mut times = vec![0.0];
    let mut snapshots = vec![u.clone()];
    let mut mass_series = vec![u.mass()];
    let mut coeff = vec![0.0; u.values().len()];
    for step_index in 0..cfg.n_steps {
        let t = step_index as f64 * cfg.dt;
        engine.advance(&mut u, t, &mut coeff)?;
        let mass = u.mass();
        let done = step_index + 1;
        if !mass.is_finite() {
            return Err(Error::Diverged { step: step_index, time: done as f64 * cfg.dt });
        }
        if done % cfg.snapshot_stride == 0 || done == cfg.n_steps {
            times.push(done as f64 * cfg.dt);
            snapshots.push(u.clone());
            mass_series.push(mass);
        }
    }
    Ok(Trajectory { times, snapshots, mass_series, dt: cfg.dt })
}

/// Runs the magnetic form from `psi0` and the oscillating form from
/// the gauge image of `psi0`, then measures how far the gauge map takes
/// one run from the other at every snapshot.
///
/// The identity behind the comparison needs `b(0) = 0` (so both runs
/// start from the same physical state) and an oscillating-form
/// configuration; the form in `cfg` is overridden per run.
pub fn solve_magnetic_and_compare(
    psi0: &Field,
    cfg: &StepConfig,
    model: &ModelParams,
    path: &BeamPath,
    soft: &SofteningSpec,
) -> Result<GaugeComparison> {
    let b0 = path.displacement(0.0);
    if b0.iter().any(|x| x.abs() > 1e-12) {
        return Err(Error::invalid(
            "path.envelope",
            format!("the gauge comparison needs b(0) = 0, got ({}, {}, {})", b0[0], b0[1], b0[2]),
        ));
    }
    let magnetic = solve(psi0, &cfg.with_form(EquationForm::Magnetic), model, path, soft)?;
    let u0 = model::gauge_u_from_psi(psi0, path, 0.0, GaugePhase(0.0))?;
    let gauged = solve(&u0, &cfg.with_form(EquationForm::Oscillating), model, path, soft)?;
    // Theta needs quadrature well below the fast period; an eighth of
    // the step the phase integral would pick on its own is plenty.
    let quad_step = std::f64::consts::PI / (16.0 * path.fast_frequency());
    let mut deviations = Vec::with_capacity(magnetic.len());
    for (j, &t) in magnetic.times().iter().enumerate() {
        let theta = model::gauge_phase(path, t, quad_step);
        let mapped = model::gauge_psi_from_u(gauged.snapshot(j), path, t, theta)?;
        deviations.push(l2_distance(magnetic.snapshot(j), &mapped)?);
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(GaugeComparison { magnetic, gauged, deviations, max_deviation })
}
