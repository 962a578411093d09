//! Complex lattice fields and their on-disk snapshot format.
//!
//! A [`Field`] is a flat row-major array of complex samples tagged with
//! the grid it lives on and whether the values are physical samples or
//! Fourier coefficients. The tag exists so that transform direction
//! mistakes surface as errors instead of silently wrong data.
//!
//! Snapshots serialize to the NLSF container: a fixed little-endian
//! header (magic, version, shape, extents, space tag) followed by the
//! samples as interleaved re/im doubles in storage order. Writing and
//! reading a field back is bit-exact.

use std::io::{Read as _, Write as _};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, MAX_DIM};

/// Which representation the samples of a [`Field`] are in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Physical,
    Fourier,
}

const NLSF_MAGIC: &[u8; 4] = b"NLSF";
const NLSF_VERSION: u32 = 1;

/// A complex-valued function sampled on a [`GridSpec`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: GridSpec,
    space: Space,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: GridSpec, space: Space) -> Field {
        Field {
            grid,
            space,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Wraps an existing sample vector; its length must match the grid.
    pub fn from_values(grid: GridSpec, space: Space, values: Vec<Complex64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "field.values",
                format!("{} samples for a grid of {} points", values.len(), grid.len()),
            ));
        }
        Ok(Field { grid, space, values })
    }

    /// Samples `f` at every lattice position (physical space).
    pub fn from_fn<F: FnMut([f64; MAX_DIM]) -> Complex64>(grid: GridSpec, mut f: F) -> Field {
        let mut values = Vec::with_capacity(grid.len());
        for lin in 0..grid.len() {
            values.push(f(grid.position(lin)));
        }
        Field {
            grid,
            space: Space::Physical,
            values,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Splits the field into its parts; used by the transform layer which
    /// re-tags the space while reusing the allocation.
    pub(crate) fn into_parts(self) -> (GridSpec, Space, Vec<Complex64>) {
        (self.grid, self.space, self.values)
    }

    pub(crate) fn from_parts(grid: GridSpec, space: Space, values: Vec<Complex64>) -> Field {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, space, values }
    }

    pub fn require_space(&self, expected: Space) -> Result<()> {
        if self.space != expected {
            return Err(Error::WrongSpace {
                expected,
                found: self.space,
            });
        }
        Ok(())
    }

    /// Discrete L2 norm. In physical space this is
    /// `sqrt(cell_volume * sum |f|^2)`; for Fourier coefficients the
    /// Parseval-consistent value `sqrt(cell_volume / prod N * sum |c|^2)`
    /// is returned, so the norm is representation-independent.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let scale = match self.space {
            Space::Physical => self.grid.cell_volume(),
            Space::Fourier => self.grid.cell_volume() / self.grid.len() as f64,
        };
        (scale * sum).sqrt()
    }

    /// Total mass `integral |f|^2`, the square of [`Field::l2_norm`].
    pub fn mass(&self) -> f64 {
        let n = self.l2_norm();
        n * n
    }

    /// True when any sample is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        // A NaN or infinity poisons the sum, so one pass suffices.
        let sum: f64 = self.values.iter().map(|v| v.re.abs() + v.im.abs()).sum();
        !sum.is_finite()
    }

    /// Writes the field as an NLSF snapshot.
    ///
    /// Layout, all little-endian:
    /// magic `"NLSF"`, version `u32`, dim `u32`, per-axis point count
    /// `u64`, per-axis extent `f64`, space flag `u8` (0 physical,
    /// 1 Fourier), then `re, im` as `f64` pairs in row-major order.
    pub fn write_nlsf(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + 16 * self.values.len());
        buf.extend_from_slice(NLSF_MAGIC);
        buf.extend_from_slice(&NLSF_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.grid.dim() as u32).to_le_bytes());
        for i in 0..self.grid.dim() {
            buf.extend_from_slice(&(self.grid.points(i) as u64).to_le_bytes());
        }
        for i in 0..self.grid.dim() {
            buf.extend_from_slice(&self.grid.extent(i).to_le_bytes());
        }
        buf.push(match self.space {
            Space::Physical => 0,
            Space::Fourier => 1,
        });
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    /// Reads a snapshot written by [`Field::write_nlsf`].
    pub fn read_nlsf(path: &Path) -> Result<Field> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };

        let magic = cur.take(4)?;
        if magic != NLSF_MAGIC {
            return Err(Error::SnapshotFormat(format!(
                "bad magic {:?}, expected {:?}",
                &magic[..4.min(magic.len())],
                NLSF_MAGIC
            )));
        }
        let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        if version != NLSF_VERSION {
            return Err(Error::SnapshotFormat(format!(
                "unsupported version {version}, expected {NLSF_VERSION}"
            )));
        }
        let dim = u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize;
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::SnapshotFormat(format!("dimension {dim} out of range")));
        }
        let mut points = Vec::with_capacity(dim);
        for _ in 0..dim {
            let n = u64::from_le_bytes(cur.take(8)?.try_into().unwrap());
            points.push(usize::try_from(n).map_err(|_| {
                Error::SnapshotFormat(format!("point count {n} too large"))
            })?);
        }
        let mut extent = Vec::with_capacity(dim);
        for _ in 0..dim {
            extent.push(f64::from_le_bytes(cur.take(8)?.try_into().unwrap()));
        }
        let space = match cur.take(1)?[0] {
            0 => Space::Physical,
            1 => Space::Fourier,
            other => {
                return Err(Error::SnapshotFormat(format!("unknown space flag {other}")))
            }
        };
        let grid = GridSpec::new(&extent, &points)
            .map_err(|e| Error::SnapshotFormat(format!("invalid grid in header: {e}")))?;
        let expected = grid.len() * 16;
        let data = cur.take(expected)?;
        if cur.pos != bytes.len() {
            return Err(Error::SnapshotFormat(format!(
                "{} trailing bytes after samples",
                bytes.len() - cur.pos
            )));
        }
        let mut values = Vec::with_capacity(grid.len());
        for chunk in data.chunks_exact(16) {
            let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
            let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
            values.push(Complex64::new(re, im));
        }
        Ok(Field { grid, space, values })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::SnapshotFormat(format!(
                "truncated: wanted {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            )));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn random_field(grid: GridSpec, seed: u64) -> Field {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::from_values(grid, Space::Physical, values).unwrap()
    }

    #[test]
    fn from_values_checks_length() {
        let g = GridSpec::new(&[10.0], &[8]).unwrap();
        assert!(Field::from_values(g, Space::Physical, vec![Complex64::default(); 7]).is_err());
    }

    #[test]
    fn l2_norm_of_normalized_gaussian_is_one() {
        // |u|^2 = exp(-x^2)/sqrt(pi) integrates to 1; on a wide box the
        // periodic trapezoid sum is exact far below 1e-10.
        let g = GridSpec::new(&[40.0], &[256]).unwrap();
        let norm = std::f64::consts::PI.powf(-0.25);
        let u = Field::from_fn(g, |x| Complex64::new(norm * (-0.5 * x[0] * x[0]).exp(), 0.0));
        assert_relative_eq!(u.l2_norm(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(u.mass(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn non_finite_detection() {
        let g = GridSpec::new(&[10.0], &[8]).unwrap();
        let mut u = Field::zeros(g, Space::Physical);
        assert!(!u.has_non_finite());
        u.values_mut()[3] = Complex64::new(f64::NAN, 0.0);
        assert!(u.has_non_finite());
        u.values_mut()[3] = Complex64::new(0.0, f64::INFINITY);
        assert!(u.has_non_finite());
    }

    #[test]
    fn nlsf_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.nlsf");
        let g = GridSpec::new(&[12.0, 10.0], &[8, 10]).unwrap();
        let u = random_field(g, 7);
        u.write_nlsf(&path).unwrap();
        let v = Field::read_nlsf(&path).unwrap();
        assert_eq!(v.space(), Space::Physical);
        assert!(v.grid().same_layout(u.grid()));
        for (a, b) in u.values().iter().zip(v.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn nlsf_rejects_corrupt_input() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(&[10.0], &[8]).unwrap();
        let u = random_field(g, 1);

        let good = dir.path().join("good.nlsf");
        u.write_nlsf(&good).unwrap();
        let bytes = std::fs::read(&good).unwrap();

        let bad_magic = dir.path().join("magic.nlsf");
        let mut m = bytes.clone();
        m[0] = b'X';
        std::fs::write(&bad_magic, &m).unwrap();
        assert!(matches!(
            Field::read_nlsf(&bad_magic),
            Err(Error::SnapshotFormat(_))
        ));

        let truncated = dir.path().join("trunc.nlsf");
        std::fs::write(&truncated, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(
            Field::read_nlsf(&truncated),
            Err(Error::SnapshotFormat(_))
        ));

        let trailing = dir.path().join("trail.nlsf");
        let mut t = bytes.clone();
        t.push(0);
        std::fs::write(&trailing, &t).unwrap();
        assert!(matches!(
            Field::read_nlsf(&trailing),
            Err(Error::SnapshotFormat(_))
        ));
    }
}
