//! Space-time norms of trajectories: `L^q_t L^r_x` mixed norms over a
//! finite horizon, restricted to exponent pairs on the dispersive
//! scaling line `1/q = (3/2)(1/2 - 1/r)` with `q in [2, inf]` and
//! `r in [2, 6]`, plus the supremum over a family of such pairs.
//!
//! The time integral is the trapezoid rule on the trajectory's snapshot
//! times; `q = inf` is the exact maximum over snapshots, not a limit.

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::integrator::Trajectory;

const RELATION_TOLERANCE: f64 = 1e-12;

/// Reciprocal with the convention `1/inf = 0`.
fn reciprocal(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// True when `(q, r)` sits on the scaling line within 1e-12 and inside
/// the admissible ranges `q in [2, inf]`, `r in [2, 6]`.
pub fn is_admissible(q: f64, r: f64) -> bool {
    if !(q >= 2.0) || !(2.0..=6.0).contains(&r) {
        return false;
    }
    let defect = reciprocal(q) - 1.5 * (0.5 - reciprocal(r));
    defect.abs() <= RELATION_TOLERANCE
}

/// An exponent pair on the scaling line, validated at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissiblePair {
    q: f64,
    r: f64,
}

impl AdmissiblePair {
    pub fn new(q: f64, r: f64) -> Result<AdmissiblePair> {
        if !is_admissible(q, r) {
            return Err(Error::invalid(
                "norm.pair",
                format!("({q}, {r}) violates 1/q = (3/2)(1/2 - 1/r) with q in [2, inf], r in [2, 6]"),
            ));
        }
        Ok(AdmissiblePair { q, r })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// The four pairs used by default: the energy pair, two interior pairs,
/// and the endpoint.
pub fn default_pairs() -> Vec<AdmissiblePair> {
    [
        (f64::INFINITY, 2.0),
        (4.0, 3.0),
        (8.0 / 3.0, 4.0),
        (2.0, 6.0),
    ]
    .into_iter()
    .map(|(q, r)| AdmissiblePair::new(q, r).expect("built-in pair is admissible"))
    .collect()
}

/// Spatial `L^r` norm of one snapshot: `(cell_volume * sum |f|^r)^{1/r}`,
/// the exact maximum of `|f|` when `r` is infinite. Physical space only.
pub fn spatial_lr_norm(f: &Field, r: f64) -> Result<f64> {
    f.require_space(Space::Physical)?;
    if r.is_infinite() && r > 0.0 {
        return Ok(f.values().iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::invalid("norm.r", format!("must be in [1, inf], got {r}")));
    }
    let cv = f.grid().cell_volume();
    if r == 2.0 {
        let sum: f64 = f.values().iter().map(|v| v.norm_sqr()).sum();
        return Ok((cv * sum).sqrt());
    }
    let sum: f64 = f.values().iter().map(|v| v.norm().powf(r)).sum();
    Ok((cv * sum).powf(1.0 / r))
}

/// A mixed norm evaluated over one trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedNormReport {
    pub pair: AdmissiblePair,
    pub value: f64,
    /// Final snapshot time; the norm integrates over `[0, horizon]`.
    pub horizon: f64,
}

/// `L^q_t L^r_x` norm of a trajectory without any admissibility check:
/// the trapezoid rule in time on the snapshot norms, the exact maximum
/// over snapshots when `q` is infinite.
pub fn mixed_norm_raw(traj: &Trajectory, q: f64, r: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::invalid("norm.q", format!("must be in [1, inf], got {q}")));
    }
    let mut phis = Vec::with_capacity(traj.len());
    for snapshot in traj.snapshots() {
        phis.push(spatial_lr_norm(snapshot, r)?);
    }
    if q.is_infinite() {
        return Ok(phis.into_iter().fold(0.0, f64::max));
    }
    if traj.len() < 2 {
        return Err(Error::invalid(
            "trajectory.times",
            "a finite-q mixed norm needs at least two snapshots",
        ));
    }
    let times = traj.times();
    let mut integral = 0.0;
    for j in 0..times.len() - 1 {
        let dt = times[j + 1] - times[j];
        integral += 0.5 * (phis[j].powf(q) + phis[j + 1].powf(q)) * dt;
    }
    Ok(integral.powf(1.0 / q))
}

/// Mixed norm for an admissible pair, with the pair and horizon echoed
/// back for reporting.
pub fn mixed_norm(traj: &Trajectory, pair: AdmissiblePair) -> Result<MixedNormReport> {
    let value = mixed_norm_raw(traj, pair.q, pair.r)?;
    let horizon = *traj.times().last().expect("trajectory is never empty");
    Ok(MixedNormReport { pair, value, horizon })
}

/// Supremum of the mixed norms over a family of pairs.
pub fn s_norm(traj: &Trajectory, pairs: &[AdmissiblePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::invalid("norm.pairs", "need at least one pair"));
    }
    let mut best = 0.0f64;
    for &pair in pairs {
        best = best.max(mixed_norm(traj, pair)?.value);
    }
    Ok(best)
}
