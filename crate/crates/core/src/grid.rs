//! Periodic simulation boxes and their discrete wavenumber tables.
//!
//! A grid is a box-centered uniform lattice: axis `i` carries `points[i]`
//! samples at coordinates `x_j = -extent[i]/2 + j * spacing(i)`, so the
//! box is `[-L/2, L/2)` per axis and fields are treated as `L`-periodic.
//! Linear storage is row-major with the last axis fastest.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Shape and physical size of a periodic box. Cheap to copy; validated at
/// construction so the rest of the crate can trust `dim`, parity, and
/// positivity without re-checking.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    dim: usize,
    extent: [f64; MAX_DIM],
    points: [usize; MAX_DIM],
}

impl GridSpec {
    /// Builds a grid from per-axis extents and point counts. Requires
    /// 1 to 3 axes, positive finite extents, and even point counts of at
    /// least 8 (the transform layout assumes an even split of modes).
    pub fn new(extent: &[f64], points: &[usize]) -> Result<GridSpec> {
        let dim = extent.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::invalid(
                "grid.dim",
                format!("dimension must be 1..=3, got {dim}"),
            ));
        }
        if points.len() != dim {
            return Err(Error::invalid(
                "grid.points",
                format!("{} point counts for {dim} extents", points.len()),
            ));
        }
        let mut e = [1.0; MAX_DIM];
        let mut n = [1usize; MAX_DIM];
        let mut total: usize = 1;
        for i in 0..dim {
            if !(extent[i].is_finite() && extent[i] > 0.0) {
                return Err(Error::invalid(
                    "grid.extent",
                    format!("axis {i} extent must be positive and finite, got {}", extent[i]),
                ));
            }
            if points[i] < 8 || points[i] % 2 != 0 {
                return Err(Error::invalid(
                    "grid.points",
                    format!("axis {i} needs an even point count >= 8, got {}", points[i]),
                ));
            }
            e[i] = extent[i];
            n[i] = points[i];
            total = total.checked_mul(points[i]).ok_or_else(|| {
                Error::invalid("grid.points", "total point count overflows usize")
            })?;
        }
        let _ = total;
        Ok(GridSpec {
            dim,
            extent: e,
            points: n,
        })
    }

    /// Cubic convenience: same extent and point count on every axis.
    pub fn cubic(dim: usize, extent: f64, points: usize) -> Result<GridSpec> {
        GridSpec::new(&vec![extent; dim], &vec![points; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    /// Grid step on `axis`; derived from the stored extent and count so
    /// spacing * points reproduces the extent exactly as stored.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.points[axis] as f64
    }

    /// Total number of lattice points.
    pub fn len(&self) -> usize {
        self.points[..self.dim].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Product of the grid steps: the volume element for lattice sums.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|i| self.spacing(i)).product()
    }

    /// Box-centered sample coordinates along `axis`.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        let x0 = -0.5 * self.extent[axis];
        (0..self.points[axis]).map(|j| x0 + j as f64 * h).collect()
    }

    /// Linear index of the multi-index `idx` (row-major, last axis fastest).
    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim);
        let mut lin = 0;
        for i in 0..self.dim {
            debug_assert!(idx[i] < self.points[i]);
            lin = lin * self.points[i] + idx[i];
        }
        lin
    }

    /// Inverse of `linear_index`. Unused axes are reported as 0.
    pub fn multi_index(&self, mut lin: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for i in (0..self.dim).rev() {
            idx[i] = lin % self.points[i];
            lin /= self.points[i];
        }
        idx
    }

    /// Position of a lattice point given its linear index. Unused axes
    /// are reported as 0.
    pub fn position(&self, lin: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(lin);
        let mut x = [0.0; MAX_DIM];
        for i in 0..self.dim {
            x[i] = -0.5 * self.extent[i] + idx[i] as f64 * self.spacing(i);
        }
        x
    }

    /// True when `other` has identical shape and extents.
    pub fn same_layout(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// Per-axis discrete wavenumbers in transform-natural order:
/// `(2 pi / L) * [0, 1, .., N/2-1, -N/2, .., -1]`. Each axis holds the
/// zero mode exactly once, and the most negative mode `-N/2` appears
/// without a positive partner.
#[derive(Clone, Debug)]
pub struct WaveTable {
    dim: usize,
    axes: [Vec<f64>; MAX_DIM],
}

impl WaveTable {
    pub fn new(grid: &GridSpec) -> WaveTable {
        let mut axes: [Vec<f64>; MAX_DIM] = Default::default();
        for i in 0..grid.dim() {
            let n = grid.points(i);
            let scale = 2.0 * std::f64::consts::PI / grid.extent(i);
            axes[i] = (0..n)
                .map(|m| {
                    let signed = if m < n / 2 {
                        m as isize
                    } else {
                        m as isize - n as isize
                    };
                    scale * signed as f64
                })
                .collect();
        }
        WaveTable { dim: grid.dim(), axes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn axis(&self, axis: usize) -> &[f64] {
        &self.axes[axis]
    }

    /// Wavevector of the mode with the given linear index on `grid`.
    /// Unused axes are reported as 0.
    pub fn wavevector(&self, grid: &GridSpec, lin: usize) -> [f64; MAX_DIM] {
        let idx = grid.multi_index(lin);
        let mut k = [0.0; MAX_DIM];
        for i in 0..self.dim {
            k[i] = self.axes[i][idx[i]];
        }
        k
    }

    /// |k|^2 for every mode, in storage order. Materialized once per grid
    /// by hot paths (kinetic multipliers, Hartree kernels).
    pub fn k_squared(&self, grid: &GridSpec) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        fill_ksq(&mut out, grid, self);
        out
    }
}

fn fill_ksq(out: &mut [f64], grid: &GridSpec, table: &WaveTable) {
    match grid.dim() {
        1 => {
            for (o, k) in out.iter_mut().zip(table.axis(0)) {
                *o = k * k;
            }
        }
        2 => {
            let n1 = grid.points(1);
            for (i0, k0) in table.axis(0).iter().enumerate() {
                let base = i0 * n1;
                for (i1, k1) in table.axis(1).iter().enumerate() {
                    out[base + i1] = k0 * k0 + k1 * k1;
                }
            }
        }
        3 => {
            let n1 = grid.points(1);
            let n2 = grid.points(2);
            for (i0, k0) in table.axis(0).iter().enumerate() {
                for (i1, k1) in table.axis(1).iter().enumerate() {
                    let base = (i0 * n1 + i1) * n2;
                    let s01 = k0 * k0 + k1 * k1;
                    for (i2, k2) in table.axis(2).iter().enumerate() {
                        out[base + i2] = s01 + k2 * k2;
                    }
                }
            }
        }
        _ => unreachable!("grid dim validated at construction"),
    }
}
