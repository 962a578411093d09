//! Cross-module runs of the public API: a gauge comparison feeding the
//! norm layer and snapshot files, and the averaged equation tracking
//! the oscillating one as the frequency grows.

use nls_core::integrator::{solve, solve_magnetic_and_compare, EquationForm, StepConfig};
use nls_core::model::{BeamPath, Envelope, ModelParams, Profile, SofteningSpec};
use nls_core::norms::{default_pairs, mixed_norm, s_norm, AdmissiblePair};
use nls_core::{Field, GridSpec};
use num_complex::Complex64;

fn gaussian(grid: GridSpec) -> Field {
    Field::from_fn(grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        Complex64::new((-r2).exp(), 0.0)
    })
}

#[test]
fn a_gauge_comparison_feeds_norms_and_snapshot_files() {
    let grid = GridSpec::cubic(3, 8.0, 16).unwrap();
    let psi0 = gaussian(grid);
    let model = ModelParams::linear(1.0).unwrap();
    let path = BeamPath::new(Envelope::Constant([0.3, 0.0, 0.0]), Profile::Sin, 8.0).unwrap();
    let soft = SofteningSpec::new(0.5, 16).unwrap();
    let cfg = StepConfig::new(2e-3, 0.02, 5, 4, EquationForm::Oscillating).unwrap();

    let cmp = solve_magnetic_and_compare(&psi0, &cfg, &model, &path, &soft).unwrap();
    assert!(cmp.max_deviation <= 3e-4, "gauge deviation {:.3e}", cmp.max_deviation);
    assert_eq!(cmp.deviations.len(), cmp.magnetic.len());
    assert_eq!(cmp.magnetic.times(), cmp.gauged.times());

    // Mass stays on both sides of the comparison.
    let m0 = cmp.magnetic.mass_series()[0];
    assert!(cmp.magnetic.mass_drift() <= 1e-10 * m0);
    assert!(cmp.gauged.mass_drift() <= 1e-10 * m0);

    // The supremum norm dominates the energy pair, which is the exact
    // maximum of the snapshot l2 norms.
    let pairs = default_pairs();
    let sup = s_norm(&cmp.magnetic, &pairs).unwrap();
    let energy = mixed_norm(&cmp.magnetic, AdmissiblePair::new(f64::INFINITY, 2.0).unwrap())
        .unwrap()
        .value;
    assert!(sup >= energy);
    assert!(energy > 0.0);

    // Snapshots survive the file format bit for bit.
    let dir = tempfile::tempdir().unwrap();
    let path_on_disk = dir.path().join("final.nlsf");
    let last = cmp.magnetic.final_snapshot();
    last.write_nlsf(&path_on_disk).unwrap();
    let back = Field::read_nlsf(&path_on_disk).unwrap();
    assert!(back.grid().same_layout(last.grid()));
    for (a, b) in back.values().iter().zip(last.values()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}

#[test]
fn the_averaged_run_tracks_the_oscillating_run_better_as_omega_grows() {
    let grid = GridSpec::cubic(1, 16.0, 128).unwrap();
    let u0 = Field::from_fn(grid, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
    let model = ModelParams::linear(1.0).unwrap();
    let soft = SofteningSpec::new(0.3, 32).unwrap();
    let envelope = Envelope::Constant([0.5, 0.0, 0.0]);
    let cfg = StepConfig::new(5e-4, 0.1, 20, 8, EquationForm::Oscillating).unwrap();

    let averaged_path = BeamPath::new(envelope.clone(), Profile::Sin, 32.0).unwrap();
    let averaged = solve(
        &u0,
        &cfg.with_form(EquationForm::Averaged),
        &model,
        &averaged_path,
        &soft,
    )
    .unwrap();

    let mut gaps = Vec::new();
    for omega in [32.0, 64.0] {
        let path = BeamPath::new(envelope.clone(), Profile::Sin, omega).unwrap();
        let oscillating = solve(&u0, &cfg, &model, &path, &soft).unwrap();
        let difference = oscillating.difference(&averaged).unwrap();
        gaps.push(s_norm(&difference, &default_pairs()).unwrap());
    }
    assert!(gaps[0] > 0.0);
    assert!(
        gaps[1] < gaps[0],
        "averaging gap did not shrink: {:.3e} vs {:.3e}",
        gaps[1],
        gaps[0]
    );
}
