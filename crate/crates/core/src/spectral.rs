//! Forward and inverse spectral transforms and Fourier multipliers.
//!
//! Conventions, fixed across the crate:
//!
//! * forward: `c(k) = sum_x f(x) exp(-i k . x)` over the box-centered
//!   lattice, unnormalized;
//! * inverse: `f(x) = (1/prod N_i) sum_k c(k) exp(+i k . x)`;
//! * wavenumbers come from [`WaveTable`] in transform-natural order.
//!
//! Because samples sit at `x_j = -L/2 + j h`, the forward transform is
//! the index-space FFT times `exp(i pi m) = (-1)^m` per axis: the
//! coordinate phase is an exact sign flip, not a rounded twiddle. The
//! flips from forward and inverse cancel exactly, so diagonal multipliers
//! behave identically to the plain FFT convention while raw coefficients
//! match the physical-coordinate sum (a real even function has real
//! nonnegative coefficients, as the analytic transform says it should).

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::field::{Field, Space};
use crate::grid::{GridSpec, MAX_DIM};

/// Process-wide plan cache: planning is not free and every step reuses
/// the same handful of lengths.
static PLANS: LazyLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// Physical samples -> Fourier coefficients.
pub fn forward_transform(f: &Field) -> Result<Field> {
    f.require_space(Space::Physical)?;
    let (grid, _, mut values) = f.clone().into_parts();
    forward_values(&grid, &mut values);
    Ok(Field::from_parts(grid, Space::Fourier, values))
}

/// Fourier coefficients -> physical samples.
pub fn inverse_transform(f: &Field) -> Result<Field> {
    f.require_space(Space::Fourier)?;
    let (grid, _, mut values) = f.clone().into_parts();
    inverse_values(&grid, &mut values);
    Ok(Field::from_parts(grid, Space::Physical, values))
}

/// In-place forward transform; avoids the clone in [`forward_transform`].
pub fn forward_transform_in_place(f: &mut Field) -> Result<()> {
    f.require_space(Space::Physical)?;
    let (grid, _, mut values) = std::mem::replace(f, Field::zeros(*f.grid(), Space::Fourier))
        .into_parts();
    forward_values(&grid, &mut values);
    *f = Field::from_parts(grid, Space::Fourier, values);
    Ok(())
}

/// In-place inverse transform; avoids the clone in [`inverse_transform`].
pub fn inverse_transform_in_place(f: &mut Field) -> Result<()> {
    f.require_space(Space::Fourier)?;
    let (grid, _, mut values) = std::mem::replace(f, Field::zeros(*f.grid(), Space::Physical))
        .into_parts();
    inverse_values(&grid, &mut values);
    *f = Field::from_parts(grid, Space::Physical, values);
    Ok(())
}

fn forward_values(grid: &GridSpec, values: &mut [Complex64]) {
    for axis in 0..grid.dim() {
        axis_pass(grid, values, axis, true);
    }
}

fn inverse_values(grid: &GridSpec, values: &mut [Complex64]) {
    for axis in 0..grid.dim() {
        axis_pass(grid, values, axis, false);
    }
}

/// One FFT sweep along `axis`. Forward: FFT the lines, then negate odd
/// modes. Inverse: negate odd modes, inverse-FFT, scale by 1/n. The odd-
/// mode negation is the box-centered coordinate phase (see module docs).
fn axis_pass(grid: &GridSpec, values: &mut [Complex64], axis: usize, forward: bool) {
    let n = grid.points(axis);
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let inv_scale = 1.0 / n as f64;

    let inner: usize = (axis + 1..grid.dim()).map(|a| grid.points(a)).product();
    if inner == 1 {
        // Contiguous lines: transform every chunk in place.
        if forward {
            fft.process_with_scratch(values, &mut scratch);
            for line in values.chunks_exact_mut(n) {
                flip_odd(line);
            }
        } else {
            for line in values.chunks_exact_mut(n) {
                flip_odd(line);
            }
            fft.process_with_scratch(values, &mut scratch);
            for v in values.iter_mut() {
                *v *= inv_scale;
            }
        }
        return;
    }

    let outer = values.len() / (n * inner);
    let mut line = vec![Complex64::default(); n];
    for o in 0..outer {
        let block = o * n * inner;
        for i in 0..inner {
            let base = block + i;
            for t in 0..n {
                line[t] = values[base + t * inner];
            }
            if forward {
                fft.process_with_scratch(&mut line, &mut scratch);
                flip_odd(&mut line);
                for t in 0..n {
                    values[base + t * inner] = line[t];
                }
            } else {
                flip_odd(&mut line);
                fft.process_with_scratch(&mut line, &mut scratch);
                for t in 0..n {
                    values[base + t * inner] = line[t] * inv_scale;
                }
            }
        }
    }
}

fn flip_odd(line: &mut [Complex64]) {
    for v in line.iter_mut().skip(1).step_by(2) {
        *v = -*v;
    }
}

/// Multiplies every Fourier coefficient by `m(k)`. The closure receives
/// the wavevector padded with zeros beyond the grid dimension.
pub fn apply_multiplier<F: FnMut([f64; MAX_DIM]) -> Complex64>(
    f: &Field,
    m: F,
) -> Result<Field> {
    let mut out = f.clone();
    apply_multiplier_in_place(&mut out, m)?;
    Ok(out)
}

/// In-place variant of [`apply_multiplier`].
pub fn apply_multiplier_in_place<F: FnMut([f64; MAX_DIM]) -> Complex64>(
    f: &mut Field,
    mut m: F,
) -> Result<()> {
    f.require_space(Space::Fourier)?;
    let grid = *f.grid();
    let table = crate::grid::WaveTable::new(&grid);
    let values = f.values_mut();
    match grid.dim() {
        1 => {
            for (v, &k0) in values.iter_mut().zip(table.axis(0)) {
                *v *= m([k0, 0.0, 0.0]);
            }
        }
        2 => {
            let n1 = grid.points(1);
            for (i0, &k0) in table.axis(0).iter().enumerate() {
                let base = i0 * n1;
                for (i1, &k1) in table.axis(1).iter().enumerate() {
                    values[base + i1] *= m([k0, k1, 0.0]);
                }
            }
        }
        3 => {
            let n1 = grid.points(1);
            let n2 = grid.points(2);
            for (i0, &k0) in table.axis(0).iter().enumerate() {
                for (i1, &k1) in table.axis(1).iter().enumerate() {
                    let base = (i0 * n1 + i1) * n2;
                    for (i2, &k2) in table.axis(2).iter().enumerate() {
                        values[base + i2] *= m([k0, k1, k2]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}
