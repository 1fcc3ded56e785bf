//! Cross-module flow: solve an equilibrium, disturb it, evolve, checkpoint,
//! reload, diagnose, decompose, classify.

use kgr_core::diagnostics::{self, DiagnosticsConfig};
use kgr_core::equilibria;
use kgr_core::evolution::{self, EvolutionConfig};
use kgr_core::field::{self, FieldState};
use kgr_core::grid::SpectralGrid;
use kgr_core::resolution::{self, EquilibriumLibrary, TrichotomyVerdict};
use kgr_core::io;
use std::sync::Arc;

#[test]
fn disturbed_soliton_round_trips_through_the_whole_stack() {
    let grid = Arc::new(SpectralGrid::new(1, 512, 30.0).unwrap());
    let profile = equilibria::closed_form_ground_state_1d(3.0).unwrap();
    let (q, _) = equilibria::embed_on_grid(&profile, &grid, &[4.0]).unwrap();
    // small odd disturbance; short horizon keeps the instability dormant
    let u: Vec<f64> = grid
        .axis_coords()
        .iter()
        .zip(&q)
        .map(|(&x, &qv)| qv + 1e-3 * (-(x - 4.0) * (x - 4.0)).exp() * (x - 4.0))
        .collect();
    let state = FieldState::new(grid.clone(), u, vec![0.0; grid.len()], 3.0, 0.2).unwrap();
    let config = EvolutionConfig { dt: 2e-3, final_time: 2.0, callback_stride: 100, ..Default::default() };
    let out = evolution::evolve(&state, &config, |_, _| {}).unwrap();
    assert!(out.blowup.is_none());

    // checkpoint round-trip preserves the state bit-for-bit
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.dkgc");
    io::write_checkpoint(&path, &out.final_state, config.dt).unwrap();
    let (reloaded, dt) = io::read_checkpoint(&path).unwrap();
    assert_eq!(dt, config.dt);
    assert_eq!(reloaded.u, out.final_state.u);
    assert_eq!(reloaded.ut, out.final_state.ut);
    assert_eq!(reloaded.time, out.final_state.time);

    // diagnostics find the single off-center bump
    let diag = DiagnosticsConfig::default();
    let set = diagnostics::detect_concentration_points(&reloaded, &diag).unwrap();
    assert_eq!(set.count(), 1);
    assert!(grid.periodic_distance(&set.centers[0], &[4.0]) < 1.0);
    let exterior = diagnostics::exterior_energy(&reloaded, &set.centers, 10.0).unwrap();
    let total = field::norms(&reloaded).unwrap().h_norm.powi(2);
    assert!(exterior < 1e-4 * total);

    // decomposition matches the ground state near its true center
    let library = EquilibriumLibrary::standard(1, 3.0).unwrap();
    let decomp = resolution::decompose(&reloaded, &diag, &library).unwrap();
    assert_eq!(decomp.component_count, 1);
    let report = &decomp.components[0];
    assert_eq!(report.matched.as_deref(), Some("ground"));
    assert!((report.refined_center[0] - 4.0).abs() < 0.1, "{:?}", report.refined_center);
    assert!(decomp.global_residual < 0.05, "residual {}", decomp.global_residual);

    match resolution::classify(&out.samples, out.blowup.as_ref(), Some(&decomp)) {
        TrichotomyVerdict::Resolved { component_count, .. } => assert_eq!(component_count, 1),
        other => panic!("expected resolved, got {other:?}"),
    }
}
