//! Pseudospectral split-step machinery for a nonlinear Schrodinger
//! equation in an oscillating soft-Coulomb potential.
//!
//! The model describes a quantum state driven by a fast-oscillating
//! beam: a soft Coulomb core swept along a path `b(t)`, a Hartree
//! self-interaction, and a defocusing power term. Three equivalent
//! formulations are implemented side by side: the oscillating frame
//! (potential centered on `b(t)`), the averaged equation (fast-period
//! mean of the potential), and the magnetic frame (static potential
//! with kinetic symbol `|k + A(t)|^2`), linked to the first by an
//! exact gauge transform.
//!
//! Module map:
//! - [`grid`], [`field`]: periodic boxes, complex lattice fields.
//! - [`spectral`]: FFT transforms and Fourier multipliers.
//! - [`quadrature`]: Gauss-Legendre rules.
//! - [`model`]: equation coefficients, beam paths, potentials, gauge
//!   maps.
//! - [`nonlinearity`]: free-space Hartree solvers and the power term.
//! - [`integrator`]: Strang splitting, trajectories, and the
//!   magnetic-versus-oscillating comparison.
//! - [`norms`]: mixed space-time norms over admissible exponent pairs.
//! - [`averaging`]: standalone residual checks of the fast-averaging
//!   mechanism with a rate fit.

pub mod averaging;
pub mod error;
pub mod field;
pub mod grid;
pub mod integrator;
pub mod model;
pub mod nonlinearity;
pub mod norms;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{Field, Space};
pub use grid::{GridSpec, WaveTable};
