//! Physical model: coefficients, the oscillating beam path and its
//! vector potential, the soft-core Coulomb potential with its fast-period
//! average, and the gauge maps linking the magnetic frame to the
//! translated frame.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::{GridSpec, MAX_DIM};
use crate::quadrature;
use crate::spectral;

/// Coefficients of the equation: repulsion strength `c` of the nucleus
/// term, Hartree strength `c1`, power-term strength `a`, and the power
/// exponent `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub c: f64,
    pub c1: f64,
    pub a: f64,
    pub sigma: f64,
}

impl ModelParams {
    /// Requires `c, c1, a >= 0` and `0 < sigma < 4`.
    pub fn new(c: f64, c1: f64, a: f64, sigma: f64) -> Result<Self> {
        for (field, v) in [("model.c", c), ("model.c1", c1), ("model.a", a)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !sigma.is_finite() || sigma <= 0.0 || sigma >= 4.0 {
            return Err(Error::invalid(
                "model.sigma",
                format!("must lie in (0, 4), got {sigma}"),
            ));
        }
        Ok(ModelParams { c, c1, a, sigma })
    }

    /// Linear model: potential only, no Hartree or power term.
    pub fn linear(c: f64) -> Result<Self> {
        ModelParams::new(c, 0.0, 0.0, 1.0)
    }

    /// Mass-subcritical power exponent; global-in-time runs require this.
    pub fn is_mass_subcritical(&self) -> bool {
        self.sigma < 4.0 / 3.0
    }
}

/// Slow envelope of the beam path. Every family has an exact derivative,
/// which the vector potential needs in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum Envelope {
    Constant([f64; 3]),
    /// Coefficient `j` multiplies `t^j`.
    Polynomial(Vec<[f64; 3]>),
    /// `e0 + e1 cos(nu t)`.
    Harmonic { e0: [f64; 3], e1: [f64; 3], nu: f64 },
}

impl Envelope {
    pub fn value(&self, t: f64) -> [f64; 3] {
        match self {
            Envelope::Constant(e) => *e,
            Envelope::Polynomial(coeffs) => {
                let mut acc = [0.0; 3];
                for c in coeffs.iter().rev() {
                    for (a, ci) in acc.iter_mut().zip(c) {
                        *a = *a * t + ci;
                    }
                }
                acc
            }
            Envelope::Harmonic { e0, e1, nu } => {
                let cs = (nu * t).cos();
                [e0[0] + e1[0] * cs, e0[1] + e1[1] * cs, e0[2] + e1[2] * cs]
            }
        }
    }

    pub fn derivative(&self, t: f64) -> [f64; 3] {
        match self {
            Envelope::Constant(_) => [0.0; 3],
            Envelope::Polynomial(coeffs) => {
                // Horner on the derivative coefficients j * c_j.
                let mut acc = [0.0; 3];
                for (j, c) in coeffs.iter().enumerate().skip(1).rev() {
                    let jf = j as f64;
                    for (a, ci) in acc.iter_mut().zip(c) {
                        *a = *a * t + jf * ci;
                    }
                }
                acc
            }
            Envelope::Harmonic { e1, nu, .. } => {
                let ds = -nu * (nu * t).sin();
                [e1[0] * ds, e1[1] * ds, e1[2] * ds]
            }
        }
    }

    /// True when the envelope does not depend on time, so averaged
    /// potentials can be cached across a whole run.
    pub fn is_time_independent(&self) -> bool {
        match self {
            Envelope::Constant(_) => true,
            Envelope::Polynomial(coeffs) => coeffs.len() <= 1,
            Envelope::Harmonic { e1, nu, .. } => *e1 == [0.0; 3] || *nu == 0.0,
        }
    }

    /// True when every component with index `>= dim` vanishes, so the
    /// path never leaves the first `dim` coordinate axes. Potentials on
    /// a `dim`-dimensional grid ignore the remaining components, so a
    /// path that uses them would be silently misrepresented.
    pub fn is_confined_to(&self, dim: usize) -> bool {
        let tail_zero = |v: &[f64; 3]| v[dim.min(3)..].iter().all(|&x| x == 0.0);
        match self {
            Envelope::Constant(e) => tail_zero(e),
            Envelope::Polynomial(coeffs) => coeffs.iter().all(tail_zero),
            Envelope::Harmonic { e0, e1, .. } => tail_zero(e0) && tail_zero(e1),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64; 3]| v.iter().all(|x| x.is_finite());
        let ok = match self {
            Envelope::Constant(e) => finite(e),
            Envelope::Polynomial(coeffs) => !coeffs.is_empty() && coeffs.iter().all(finite),
            Envelope::Harmonic { e0, e1, nu } => finite(e0) && finite(e1) && nu.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("path.envelope", "entries must be finite and nonempty"))
        }
    }
}

/// Fast 2 pi periodic profile with an analytic derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Sin,
    Cos,
    One,
}

impl Profile {
    pub fn value(self, s: f64) -> f64 {
        match self {
            Profile::Sin => s.sin(),
            Profile::Cos => s.cos(),
            Profile::One => 1.0,
        }
    }

    pub fn derivative(self, s: f64) -> f64 {
        match self {
            Profile::Sin => s.cos(),
            Profile::Cos => -s.sin(),
            Profile::One => 0.0,
        }
    }
}

/// Oscillating beam path `b(t) = envelope(t) * profile(omega t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamPath {
    pub envelope: Envelope,
    pub profile: Profile,
    pub omega: f64,
}

impl BeamPath {
    pub fn new(envelope: Envelope, profile: Profile, omega: f64) -> Result<Self> {
        envelope.validate()?;
        if !omega.is_finite() || omega == 0.0 {
            return Err(Error::invalid("path.omega", format!("must be finite and nonzero, got {omega}")));
        }
        Ok(BeamPath { envelope, profile, omega })
    }

    /// `b(t) = envelope(t) * profile(omega t)`.
    pub fn displacement(&self, t: f64) -> [f64; 3] {
        let e = self.envelope.value(t);
        let f = self.profile.value(self.omega * t);
        [e[0] * f, e[1] * f, e[2] * f]
    }

    /// `A(t) = -b'(t) / 2`, so `b(t) = -2 int_0^t A` whenever b(0) = 0.
    /// With this sign the magnetic evolution (symbol `|k + A|^2`, core
    /// at the origin) is the exact gauge image of the oscillating form
    /// (core at `b(t)`); see [`gauge_u_from_psi`].
    pub fn vector_potential(&self, t: f64) -> [f64; 3] {
        let s = self.omega * t;
        let e = self.envelope.value(t);
        let de = self.envelope.derivative(t);
        let f = self.profile.value(s);
        let df = self.omega * self.profile.derivative(s);
        [
            -0.5 * (de[0] * f + e[0] * df),
            -0.5 * (de[1] * f + e[1] * df),
            -0.5 * (de[2] * f + e[2] * df),
        ]
    }

    /// True when the path never leaves the first `dim` coordinate axes.
    pub fn is_confined_to(&self, dim: usize) -> bool {
        self.envelope.is_confined_to(dim)
    }

    /// Highest angular frequency present in t -> A(t), used to pick
    /// quadrature node spacing. Conservative upper bound.
    pub fn fast_frequency(&self) -> f64 {
        let nu = match &self.envelope {
            Envelope::Harmonic { nu, .. } => nu.abs(),
            _ => 0.0,
        };
        self.omega.abs() + nu
    }
}

/// Grid regularization of the Coulomb kernel: length `delta` of the
/// soft core and the node count `quad_points` of the periodic average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SofteningSpec {
    pub delta: f64,
    pub quad_points: usize,
}

impl SofteningSpec {
    /// Requires `delta > 0` and an even `quad_points >= 8`.
    pub fn new(delta: f64, quad_points: usize) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::invalid("soft.delta", format!("must be finite and > 0, got {delta}")));
        }
        if quad_points < 8 || quad_points % 2 != 0 {
            return Err(Error::invalid(
                "soft.quad_points",
                format!("must be an even integer >= 8, got {quad_points}"),
            ));
        }
        Ok(SofteningSpec { delta, quad_points })
    }

    /// Whether the core is wide enough for the grid to resolve it; a
    /// delta below two grid spacings aliases. Callers decide whether
    /// to warn or reject.
    pub fn resolves_grid(&self, grid: &GridSpec) -> bool {
        let min_h = (0..grid.dim()).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
        self.delta >= 2.0 * min_h
    }
}

/// Accumulated gauge phase `Theta(t) = int_0^t |A(s)|^2 ds`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugePhase(pub f64);

/// Soft Coulomb centered on the instantaneous beam position:
/// `c / sqrt(|x - b(t)|^2 + delta^2)` sampled at every grid point.
/// Path components beyond the grid dimension are ignored.
pub fn oscillating_potential(
    params: &ModelParams,
    path: &BeamPath,
    soft: &SofteningSpec,
    t: f64,
    grid: &GridSpec,
) -> Field {
    let b = path.displacement(t);
    soft_coulomb(params.c, &b, soft.delta, grid)
}

/// Soft Coulomb centered at a fixed point `b`.
pub fn soft_coulomb(c: f64, b: &[f64; 3], delta: f64, grid: &GridSpec) -> Field {
    let dim = grid.dim();
    let d2 = delta * delta;
    Field::from_fn(*grid, |x| {
        let mut r2 = d2;
        for axis in 0..dim {
            let dx = x[axis] - b[axis];
            r2 += dx * dx;
        }
        Complex64::new(c / r2.sqrt(), 0.0)
    })
}

/// Fast-period average of the moving soft Coulomb potential:
/// the `quad_points`-node periodic trapezoid rule for
/// `(1/2pi) int_0^{2pi} c / sqrt(|x - e(t) f(tau)|^2 + delta^2) dtau`.
///
/// The fast frequency does not enter: two paths differing only in omega
/// produce identical output. Each point's node values are summed
/// pairwise, so a tau-independent integrand averages to itself exactly.
pub fn averaged_potential(
    params: &ModelParams,
    path: &BeamPath,
    soft: &SofteningSpec,
    t: f64,
    grid: &GridSpec,
) -> Field {
    let m = soft.quad_points;
    let e = path.envelope.value(t);
    let dim = grid.dim();
    let d2 = soft.delta * soft.delta;
    let c = params.c;
    let centers: Vec<[f64; 3]> = (0..m)
        .map(|j| {
            let f = path.profile.value(2.0 * std::f64::consts::PI * j as f64 / m as f64);
            [e[0] * f, e[1] * f, e[2] * f]
        })
        .collect();
    let mut terms = vec![0.0; m];
    Field::from_fn(*grid, |x| {
        for (term, b) in terms.iter_mut().zip(&centers) {
            let mut r2 = d2;
            for axis in 0..dim {
                let dx = x[axis] - b[axis];
                r2 += dx * dx;
            }
            *term = c / r2.sqrt();
        }
        Complex64::new(pairwise_sum(&terms) / m as f64, 0.0)
    })
}

fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let (lo, hi) = v.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// `Theta(t) = int_0^t |A(s)|^2 ds` by composite Gauss-Legendre.
///
/// Node spacing is the tighter of `quad_step` and a quarter period of
/// the fastest frequency in `A`, so the oscillation is always resolved;
/// pass a small `quad_step` for extra accuracy, `f64::INFINITY` to let
/// the path set the scale.
pub fn gauge_phase(path: &BeamPath, t: f64, quad_step: f64) -> GaugePhase {
    let spacing = quad_step.min(std::f64::consts::PI / (4.0 * path.fast_frequency()));
    let value = quadrature::integrate_composite(
        |s| {
            let a = path.vector_potential(s);
            a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
        },
        0.0,
        t,
        8,
        spacing,
    );
    GaugePhase(value)
}

/// Gauge map to the frame that follows the beam:
/// `u(x) = psi(x - b(t)) e^{i Theta}`, so the static core at the origin
/// in the `psi` frame sits at `b(t)` in the `u` frame. The translation
/// is a Fourier-space multiplier `e^{-i k . b}`, exact on the grid;
/// components of `b` beyond the grid dimension are ignored.
pub fn gauge_u_from_psi(psi: &Field, path: &BeamPath, t: f64, theta: GaugePhase) -> Result<Field> {
    translate_and_phase(psi, path.displacement(t), 1.0, theta.0)
}

/// Inverse gauge map: `psi(x) = u(x + b(t)) e^{-i Theta}`. Exact inverse
/// of [`gauge_u_from_psi`] up to transform roundoff.
pub fn gauge_psi_from_u(u: &Field, path: &BeamPath, t: f64, theta: GaugePhase) -> Result<Field> {
    translate_and_phase(u, path.displacement(t), -1.0, theta.0)
}

/// Applies `f(x - sign * b) e^{i sign theta}`.
fn translate_and_phase(f: &Field, b: [f64; 3], sign: f64, theta: f64) -> Result<Field> {
    f.require_space(Space::Physical)?;
    // Zero displacement asks for a pure phase; skip the transforms so
    // the map is exact (and the identity when the phase is zero too).
    if b[..f.grid().dim()].iter().all(|&x| x == 0.0) {
        if theta == 0.0 {
            return Ok(f.clone());
        }
        let mut out = f.clone();
        let phase = Complex64::from_polar(1.0, sign * theta);
        for v in out.values_mut() {
            *v *= phase;
        }
        return Ok(out);
    }
    let mut c = spectral::forward_transform(f)?;
    spectral::apply_multiplier_in_place(&mut c, |k: [f64; MAX_DIM]| {
        Complex64::from_polar(1.0, -sign * (k[0] * b[0] + k[1] * b[1] + k[2] * b[2]))
    })?;
    spectral::inverse_transform_in_place(&mut c)?;
    let phase = Complex64::from_polar(1.0, sign * theta);
    for v in c.values_mut() {
        *v *= phase;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_x() -> Envelope {
        Envelope::Constant([1.0, 0.0, 0.0])
    }

    #[test]
    fn params_are_validated() {
        assert!(ModelParams::new(-1.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -0.1, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0, 4.0).is_err());
        let p = ModelParams::new(1.0, 1.0, 1.0, 2.0 / 3.0).unwrap();
        assert!(p.is_mass_subcritical());
        assert!(!ModelParams::new(0.0, 0.0, 0.0, 2.0).unwrap().is_mass_subcritical());
    }

    #[test]
    fn beam_path_rejects_zero_frequency() {
        assert!(BeamPath::new(unit_x(), Profile::Sin, 0.0).is_err());
        assert!(BeamPath::new(unit_x(), Profile::Sin, f64::NAN).is_err());
        assert!(BeamPath::new(Envelope::Polynomial(vec![]), Profile::Sin, 1.0).is_err());
    }

    #[test]
    fn profiles_are_periodic_with_matching_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for profile in [Profile::Sin, Profile::Cos, Profile::One] {
            for _ in 0..32 {
                let s = rng.gen_range(-10.0..10.0);
                let period = 2.0 * std::f64::consts::PI;
                assert!((profile.value(s + period) - profile.value(s)).abs() <= 1e-12);
                let h = 1e-6;
                let fd = (profile.value(s + h) - profile.value(s - h)) / (2.0 * h);
                assert!((profile.derivative(s) - fd).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn displacement_matches_direct_evaluation() {
        let path = BeamPath::new(unit_x(), Profile::Sin, 10.0).unwrap();
        assert_eq!(path.displacement(0.0), [0.0, 0.0, 0.0]);
        let b = path.displacement(std::f64::consts::PI / 20.0);
        assert_relative_eq!(b[0], 1.0, epsilon = 1e-15);

        let harmonic = BeamPath::new(
            Envelope::Harmonic {
                e0: [1.0, 0.0, 0.0],
                e1: [0.5, 0.0, 0.0],
                nu: 1.0,
            },
            Profile::Sin,
            64.0,
        )
        .unwrap();
        let expect = (1.0 + 0.5 * 1f64.cos()) * 64f64.sin();
        assert_relative_eq!(harmonic.displacement(1.0)[0], expect, epsilon = 1e-14);
    }

    #[test]
    fn vector_potential_is_minus_half_the_path_velocity() {
        let omega = 12.0;
        let path = BeamPath::new(unit_x(), Profile::Sin, omega).unwrap();
        let a0 = path.vector_potential(0.0);
        assert_relative_eq!(a0[0], -omega / 2.0, epsilon = 1e-15);

        // Constant A0 realized as b = -2 A0 t.
        let a_target = [-0.3, 0.2, 0.0];
        let linear = BeamPath::new(
            Envelope::Polynomial(vec![[0.0; 3], [0.6, -0.4, 0.0]]),
            Profile::One,
            1.0,
        )
        .unwrap();
        for t in [0.0, 0.1, 1.7] {
            let a = linear.vector_potential(t);
            for (got, want) in a.iter().zip(&a_target) {
                assert_relative_eq!(got, want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn vector_potential_matches_finite_difference_of_displacement() {
        let path = BeamPath::new(
            Envelope::Harmonic {
                e0: [1.0, 0.2, 0.0],
                e1: [0.5, 0.0, 0.3],
                nu: 2.0,
            },
            Profile::Cos,
            32.0,
        )
        .unwrap();
        let h = 1e-6;
        for t in [0.1, 0.45, 1.3] {
            let a = path.vector_potential(t);
            let hi = path.displacement(t + h);
            let lo = path.displacement(t - h);
            for axis in 0..3 {
                let fd = -0.5 * (hi[axis] - lo[axis]) / (2.0 * h);
                assert_relative_eq!(a[axis], fd, max_relative = 1e-6, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn oscillating_potential_samples_the_soft_core() {
        let grid = GridSpec::cubic(3, 16.0, 16).unwrap();
        let params = ModelParams::linear(1.0).unwrap();
        let soft = SofteningSpec::new(0.1, 8).unwrap();
        // Envelope pinned so b(0.3 / omega ... ) is easiest at t with
        // sin(omega t) = 1: b = (0.3, 0, 0).
        let path = BeamPath::new(Envelope::Constant([0.3, 0.0, 0.0]), Profile::Sin, 2.0).unwrap();
        let t = std::f64::consts::PI / 4.0;
        let v = oscillating_potential(&params, &path, &soft, t, &grid);
        let at_origin = v.values()[grid.linear_index(&[8, 8, 8])];
        assert_relative_eq!(at_origin.re, 1.0 / (0.3f64 * 0.3 + 0.01).sqrt(), epsilon = 1e-12);
        let at_x1 = v.values()[grid.linear_index(&[9, 8, 8])];
        assert_relative_eq!(at_x1.re, 1.0 / 0.5f64.sqrt(), epsilon = 1e-12);

        // Peak bound c / delta holds everywhere.
        for v in v.values() {
            assert!(v.re <= 1.0 / 0.1 + 1e-12 && v.im == 0.0);
        }

        let zero = oscillating_potential(&ModelParams::linear(0.0).unwrap(), &path, &soft, t, &grid);
        assert!(zero.values().iter().all(|v| v.re == 0.0 && v.im == 0.0));
    }

    #[test]
    fn averaged_potential_ignores_omega_bitwise() {
        let grid = GridSpec::new(&[12.0], &[32]).unwrap();
        let params = ModelParams::linear(0.8).unwrap();
        let soft = SofteningSpec::new(0.2, 16).unwrap();
        let env = Envelope::Constant([0.5, 0.0, 0.0]);
        let slow = BeamPath::new(env.clone(), Profile::Sin, 8.0).unwrap();
        let fast = BeamPath::new(env, Profile::Sin, 977.3).unwrap();
        let a = averaged_potential(&params, &slow, &soft, 0.4, &grid);
        let b = averaged_potential(&params, &fast, &soft, 0.4, &grid);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn averaged_potential_with_pinned_envelope_is_the_static_core_bitwise() {
        let grid = GridSpec::new(&[10.0, 10.0], &[16, 16]).unwrap();
        let params = ModelParams::linear(1.3).unwrap();
        let soft = SofteningSpec::new(0.25, 128).unwrap();
        let still = BeamPath::new(Envelope::Constant([0.0; 3]), Profile::Sin, 32.0).unwrap();
        let avg = averaged_potential(&params, &still, &soft, 1.0, &grid);
        let v = soft_coulomb(1.3, &[0.0; 3], 0.25, &grid);
        for (x, y) in avg.values().iter().zip(v.values()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
        }
    }

    #[test]
    fn averaged_potential_node_refinement_is_converged() {
        // Periodic trapezoid converges spectrally in the node count; the
        // rate is set by the integrand's analyticity strip, which narrows
        // to ~delta/|envelope| over the swept segment. At x = 2, two
        // units clear of the path, 64 nodes already sit at roundoff; on
        // top of the path the coarse rule is still good to ~1e-3.
        let grid = GridSpec::new(&[8.0], &[8]).unwrap();
        let params = ModelParams::linear(1.0).unwrap();
        let path = BeamPath::new(Envelope::Constant([0.5, 0.0, 0.0]), Profile::Sin, 4.0).unwrap();
        let coarse = averaged_potential(&params, &path, &SofteningSpec::new(0.05, 64).unwrap(), 0.0, &grid);
        let fine = averaged_potential(&params, &path, &SofteningSpec::new(0.05, 128).unwrap(), 0.0, &grid);
        let far = grid.linear_index(&[6]);
        assert_relative_eq!(grid.coords(0)[6], 2.0, epsilon = 1e-15);
        assert_relative_eq!(coarse.values()[far].re, fine.values()[far].re, max_relative = 1e-12);
        for (x, y) in coarse.values().iter().zip(fine.values()) {
            assert_relative_eq!(x.re, y.re, max_relative = 1e-2);
        }
    }

    #[test]
    fn time_average_of_the_oscillating_potential_converges_to_the_mean() {
        let grid = GridSpec::new(&[10.0], &[32]).unwrap();
        let params = ModelParams::linear(1.0).unwrap();
        let soft = SofteningSpec::new(0.3, 128).unwrap();
        let omega = 6.0;
        let path = BeamPath::new(Envelope::Constant([0.7, 0.0, 0.0]), Profile::Sin, omega).unwrap();
        let period = 2.0 * std::f64::consts::PI / omega;
        let mean = averaged_potential(&params, &path, &soft, 0.0, &grid);
        for (lin, want) in mean.values().iter().enumerate() {
            let x = grid.position(lin);
            let got = quadrature::integrate_composite(
                |t| {
                    let b = path.displacement(t);
                    let dx = x[0] - b[0];
                    1.0 / (dx * dx + soft.delta * soft.delta).sqrt()
                },
                0.0,
                period,
                8,
                period / 256.0,
            ) / period;
            assert!((got - want.re).abs() <= 1e-10, "point {lin}: {got} vs {}", want.re);
        }
    }

    #[test]
    fn gauge_phase_matches_closed_forms() {
        // A == 0.
        let still = BeamPath::new(Envelope::Constant([0.0; 3]), Profile::Sin, 8.0).unwrap();
        assert_eq!(gauge_phase(&still, 1.3, 0.05).0, 0.0);

        // Constant A0 = (0.3, -0.2, 0): Theta = |A0|^2 t.
        let linear = BeamPath::new(
            Envelope::Polynomial(vec![[0.0; 3], [0.6, -0.4, 0.0]]),
            Profile::One,
            1.0,
        )
        .unwrap();
        let t = 0.9;
        let a2 = 0.3f64 * 0.3 + 0.2 * 0.2;
        assert_relative_eq!(gauge_phase(&linear, t, 0.05).0, a2 * t, max_relative = 1e-12);

        // b = e0 sin(omega t), |e0| = 1: A = (omega/2) e0 cos(omega t),
        // Theta(t) = (omega^2/8) (t + sin(2 omega t) / (2 omega)).
        let omega = 16.0;
        let path = BeamPath::new(unit_x(), Profile::Sin, omega).unwrap();
        let t = 0.37;
        let closed = omega * omega / 8.0 * (t + (2.0 * omega * t).sin() / (2.0 * omega));
        assert_relative_eq!(gauge_phase(&path, t, 1e-3).0, closed, max_relative = 1e-10);

        // Theta(0) = 0 and Theta nondecreasing along a sampled ramp.
        assert_eq!(gauge_phase(&path, 0.0, 0.1).0, 0.0);
        let mut prev = 0.0;
        for j in 1..=16 {
            let cur = gauge_phase(&path, 0.1 * j as f64, 1e-3).0;
            assert!(cur >= prev);
            prev = cur;
        }
    }

    fn random_field(grid: GridSpec, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::from_values(grid, Space::Physical, values).unwrap()
    }

    #[test]
    fn gauge_map_by_one_grid_spacing_is_a_circular_shift() {
        let grid = GridSpec::new(&[8.0, 6.0, 10.0], &[8, 12, 10]).unwrap();
        let h1 = grid.spacing(1);
        let path = BeamPath::new(Envelope::Constant([0.0, h1, 0.0]), Profile::One, 1.0).unwrap();
        let psi = random_field(grid, 11);
        let u = gauge_u_from_psi(&psi, &path, 0.7, GaugePhase(0.0)).unwrap();
        let peak = psi.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i0 in 0..8 {
            for i1 in 0..12 {
                for i2 in 0..10 {
                    let shifted = psi.values()[grid.linear_index(&[i0, (i1 + 11) % 12, i2])];
                    let got = u.values()[grid.linear_index(&[i0, i1, i2])];
                    assert!((got - shifted).norm() <= 1e-12 * peak);
                }
            }
        }
    }

    #[test]
    fn gauge_maps_invert_each_other_and_preserve_mass() {
        let grid = GridSpec::new(&[9.0, 7.0], &[16, 12]).unwrap();
        let path = BeamPath::new(
            Envelope::Harmonic {
                e0: [0.4, -0.3, 0.0],
                e1: [0.1, 0.2, 0.0],
                nu: 3.0,
            },
            Profile::Sin,
            24.0,
        )
        .unwrap();
        let psi = random_field(grid, 23);
        let theta = GaugePhase(1.234);
        let u = gauge_u_from_psi(&psi, &path, 0.51, theta).unwrap();
        assert_relative_eq!(u.l2_norm(), psi.l2_norm(), max_relative = 1e-12);
        let back = gauge_psi_from_u(&u, &path, 0.51, theta).unwrap();
        let peak = psi.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in psi.values().iter().zip(back.values()) {
            assert!((a - b).norm() <= 1e-12 * peak);
        }
    }

    #[test]
    fn gauge_map_without_displacement_is_a_pure_phase() {
        let grid = GridSpec::new(&[6.0], &[16]).unwrap();
        let still = BeamPath::new(Envelope::Constant([0.0; 3]), Profile::Sin, 4.0).unwrap();
        let u = random_field(grid, 3);
        let theta = GaugePhase(0.77);
        let psi = gauge_psi_from_u(&u, &still, 0.2, theta).unwrap();
        let phase = Complex64::from_polar(1.0, -0.77);
        for (a, b) in psi.values().iter().zip(u.values()) {
            assert!((a - b * phase).norm() <= 1e-12);
        }
    }

    #[test]
    fn softening_spec_is_validated() {
        assert!(SofteningSpec::new(0.0, 16).is_err());
        assert!(SofteningSpec::new(-0.1, 16).is_err());
        assert!(SofteningSpec::new(0.1, 7).is_err());
        assert!(SofteningSpec::new(0.1, 9).is_err());
        let soft = SofteningSpec::new(0.5, 16).unwrap();
        let resolved = GridSpec::new(&[16.0], &[64]).unwrap();
        assert!(soft.resolves_grid(&resolved));
        let too_coarse = GridSpec::new(&[16.0], &[16]).unwrap();
        assert!(!soft.resolves_grid(&too_coarse));
    }
}
