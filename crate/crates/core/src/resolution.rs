//! Decomposition of a state into translated equilibria plus residual, and the
//! blowup / unbounded / resolved trichotomy classifier.

use crate::diagnostics::{self, DiagnosticsConfig};
use crate::equilibria::{self, EquilibriumProfile};
use crate::error::{KgError, Result};
use crate::evolution::{BlowupReport, TrajectorySample};
use crate::field::{self, FieldState};
use crate::grid::SpectralGrid;
use crate::spectral;
use num_complex::Complex64;
use serde::Serialize;

/// Residual-to-norm ratio above which a component is declared unmatched.
pub const UNMATCHED_RATIO: f64 = 0.5;
/// `|u_t|_2` tolerance for the resolved verdict.
pub const RESOLVED_UT_TOL: f64 = 1e-3;
/// Global residual tolerance for the resolved verdict.
pub const RESOLVED_RESIDUAL_TOL: f64 = 1e-2;
/// H-norm log-slope (per unit time) above which growth is suspected.
pub const GROWTH_SLOPE_TOL: f64 = 0.01;

/// Named equilibrium profiles available to the matcher.
#[derive(Debug, Clone)]
pub struct EquilibriumLibrary {
    pub entries: Vec<(String, EquilibriumProfile)>,
}

impl EquilibriumLibrary {
    /// Ground state, plus the one-node state for d = 2 where sign-changing
    /// bound states exist and the shooting solver reaches them reliably.
    pub fn standard(dimension: usize, exponent: f64) -> Result<Self> {
        let mut entries = Vec::new();
        if dimension == 1 {
            entries.push(("ground".to_string(), equilibria::closed_form_ground_state_1d(exponent)?));
        } else {
            let profile =
                equilibria::radial_shoot(dimension, exponent, 0, &Default::default())?;
            entries.push(("ground".to_string(), profile));
            if dimension == 2 {
                let nodal = equilibria::radial_shoot(2, exponent, 1, &Default::default())?;
                entries.push(("nodal1".to_string(), nodal));
            }
        }
        Ok(EquilibriumLibrary { entries })
    }

    pub fn from_profiles(entries: Vec<(String, EquilibriumProfile)>) -> Self {
        EquilibriumLibrary { entries }
    }
}

/// Normalized inverse-bracket weights `psi_j(x) = <x - x_j>^-1 / sum_l <x - x_l>^-1`
/// with `<y> = (1 + |y|^2)^{1/2}` and periodic distances.
pub fn partition_weights(grid: &SpectralGrid, centers: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if centers.is_empty() {
        return Err(KgError::usage("partition of unity needs at least one center"));
    }
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            if grid.periodic_distance(&centers[i], &centers[j]) < 0.5 * grid.spacing() {
                return Err(KgError::usage(format!(
                    "duplicate centers {:?} and {:?}",
                    centers[i], centers[j]
                )));
            }
        }
    }
    let mut weights = vec![vec![0.0; grid.len()]; centers.len()];
    for flat in 0..grid.len() {
        let x = grid.point(flat);
        let mut total = 0.0;
        for (j, c) in centers.iter().enumerate() {
            let d = grid.periodic_distance(&x, c);
            let w = 1.0 / (1.0 + d * d).sqrt();
            weights[j][flat] = w;
            total += w;
        }
        for w in weights.iter_mut() {
            w[flat] /= total;
        }
    }
    Ok(weights)
}

/// One piece of the state, recentered so its concentration point sits at the
/// origin.
#[derive(Debug, Clone)]
pub struct Component {
    /// Center snapped to the grid (so recentering is an exact index roll).
    pub center: Vec<f64>,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub h_norm: f64,
}

fn snap_to_grid(grid: &SpectralGrid, center: &[f64]) -> (Vec<f64>, Vec<i64>) {
    let h = grid.spacing();
    let n = grid.points_per_axis() as i64;
    let mut snapped = Vec::with_capacity(grid.dimension());
    let mut cells = Vec::with_capacity(grid.dimension());
    for a in 0..grid.dimension() {
        let cell = ((center[a] + grid.half_length()) / h).round() as i64;
        let cell = cell.rem_euclid(n);
        cells.push(cell);
        snapped.push(-grid.half_length() + cell as f64 * h);
    }
    (snapped, cells)
}

/// Split `(u, u_t)` into per-center components `w_j = tau_{-x_j}(psi_j u)`.
///
/// Centers are snapped to the nearest grid point so the translation is an
/// exact roll and the reconstruction `sum_j tau_{x_j} w_j = u` holds to
/// machine precision.
pub fn split_components(state: &FieldState, centers: &[Vec<f64>]) -> Result<Vec<Component>> {
    let grid = &state.grid;
    let snapped: Vec<(Vec<f64>, Vec<i64>)> =
        centers.iter().map(|c| snap_to_grid(grid, c)).collect();
    let snapped_centers: Vec<Vec<f64>> = snapped.iter().map(|(c, _)| c.clone()).collect();
    let weights = partition_weights(grid, &snapped_centers)?;
    let mut out = Vec::with_capacity(centers.len());
    for ((center, cells), weight) in snapped.into_iter().zip(weights) {
        let wu: Vec<f64> = state.u.iter().zip(&weight).map(|(a, b)| a * b).collect();
        let wut: Vec<f64> = state.ut.iter().zip(&weight).map(|(a, b)| a * b).collect();
        let neg: Vec<i64> = cells.iter().map(|&c| -c).collect();
        // recenter: the snapped center cell moves to x = 0 (index n/2)
        let half = grid.points_per_axis() as i64 / 2;
        let to_origin: Vec<i64> = neg.iter().map(|&c| c + half).collect();
        let u = spectral::roll(grid, &wu, &to_origin)?;
        let ut = spectral::roll(grid, &wut, &to_origin)?;
        let mut comp_state = state.clone();
        comp_state.u = u;
        comp_state.ut = ut;
        let norms = field::norms(&comp_state)?;
        out.push(Component {
            center,
            u: comp_state.u,
            ut: comp_state.ut,
            h_norm: norms.h_norm,
        });
    }
    Ok(out)
}

/// Rebuild the field from components (test helper; exact by construction).
pub fn reconstruct(grid: &SpectralGrid, components: &[Component]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut u = vec![0.0; grid.len()];
    let mut ut = vec![0.0; grid.len()];
    let h = grid.spacing();
    let half = grid.points_per_axis() as i64 / 2;
    for comp in components {
        let cells: Vec<i64> = comp
            .center
            .iter()
            .map(|&c| ((c + grid.half_length()) / h).round() as i64 - half)
            .collect();
        let bu = spectral::roll(grid, &comp.u, &cells)?;
        let but = spectral::roll(grid, &comp.ut, &cells)?;
        for i in 0..grid.len() {
            u[i] += bu[i];
            ut[i] += but[i];
        }
    }
    Ok((u, ut))
}

/// Result of matching one component against the library.
#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    /// Library entry name, or `None` for an unmatched (radiation) component.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched: Option<String>,
    pub sign: i8,
    /// Center after sub-grid correlation refinement, absolute coordinates.
    pub refined_center: Vec<f64>,
    /// `H^1` distance between the component and the matched translate.
    pub residual: f64,
    pub component_h_norm: f64,
}

fn h1_norm(grid: &SpectralGrid, f: &[f64]) -> Result<f64> {
    let spec = spectral::forward(grid, f)?;
    let k2 = grid.k_squared();
    let parseval = grid.cell_volume() / grid.len() as f64;
    Ok((parseval
        * spec
            .iter()
            .zip(k2.iter())
            .map(|(c, &kk)| (1.0 + kk) * c.norm_sqr())
            .sum::<f64>())
    .sqrt())
}

/// Band-limited evaluation of the correlation surface at fractional lag `t`
/// (grid-cell units), with first and second derivatives along `axis`.
/// Nyquist modes are dropped; they carry no information for smooth fields and
/// have no odd-derivative continuation.
fn corr_probe(
    grid: &SpectralGrid,
    corr_hat: &[Complex64],
    t: &[f64],
    axis: usize,
) -> (f64, f64, f64) {
    let n = grid.points_per_axis();
    let half = n / 2;
    let theta = 2.0 * std::f64::consts::PI / n as f64;
    // per-axis phase tables e^{i theta m t}
    let mut tables: Vec<Vec<Complex64>> = Vec::with_capacity(grid.dimension());
    for a in 0..grid.dimension() {
        tables.push(
            (0..n)
                .map(|j| {
                    if j == half {
                        Complex64::default()
                    } else {
                        Complex64::from_polar(1.0, theta * grid.mode_index(j) as f64 * t[a])
                    }
                })
                .collect(),
        );
    }
    let mut c0 = Complex64::default();
    let mut c1 = Complex64::default();
    let mut c2 = Complex64::default();
    for (flat, &c) in corr_hat.iter().enumerate() {
        let idx = grid.unravel(flat);
        let mut term = c;
        for a in 0..grid.dimension() {
            term *= tables[a][idx[a]];
        }
        let m = Complex64::new(0.0, theta * grid.mode_index(idx[axis]) as f64);
        c0 += term;
        c1 += m * term;
        c2 += m * m * term;
    }
    let scale = 1.0 / grid.len() as f64;
    (c0.re * scale, c1.re * scale, c2.re * scale)
}

/// Newton refinement of a correlation maximum of `sign * corr`, starting from
/// a lag in grid-cell units. Converges to machine precision for smooth peaks.
fn refine_lag(grid: &SpectralGrid, corr_hat: &[Complex64], start: &[f64], sign: f64) -> Vec<f64> {
    let mut t = start.to_vec();
    for _ in 0..8 {
        let mut moved = 0.0f64;
        for axis in 0..grid.dimension() {
            let (_, d1, d2) = corr_probe(grid, corr_hat, &t, axis);
            if sign * d2 >= 0.0 {
                continue; // not locally concave; keep the discrete peak
            }
            let step = (-d1 / d2).clamp(-0.5, 0.5);
            t[axis] += step;
            moved = moved.max(step.abs());
        }
        if moved < 1e-13 {
            break;
        }
    }
    t
}

/// Match a recentered component against every `(entry, sign)` pair, refining
/// the center via the cross-correlation peak.
pub fn match_equilibrium(
    component: &Component,
    library: &EquilibriumLibrary,
    grid: &SpectralGrid,
) -> Result<MatchReport> {
    if library.entries.is_empty() {
        return Err(KgError::usage("equilibrium library is empty"));
    }
    let w_hat = spectral::forward(grid, &component.u)?;
    let h = grid.spacing();
    let mut best: Option<(String, i8, Vec<f64>, f64)> = None;
    for (name, profile) in &library.entries {
        if profile.dimension != grid.dimension() {
            continue;
        }
        let (q, _) = equilibria::embed_on_grid(profile, grid, &vec![0.0; grid.dimension()])?;
        let q_hat = spectral::forward(grid, &q)?;
        // corr[m] = sum_x w(x) q(x - m)
        let corr_hat: Vec<Complex64> =
            w_hat.iter().zip(&q_hat).map(|(a, b)| a * b.conj()).collect();
        let corr = spectral::inverse(grid, &corr_hat)?;
        for &sign in &[1i8, -1i8] {
            let score = |flat: usize| sign as f64 * corr[flat];
            let peak_flat = (0..corr.len())
                .max_by(|&a, &b| score(a).partial_cmp(&score(b)).unwrap())
                .unwrap();
            let peak_idx = grid.unravel(peak_flat);
            // correlation lag index is periodic: fold to a signed shift, then
            // refine sub-cell by Newton on the band-limited correlation
            let start: Vec<f64> =
                (0..grid.dimension()).map(|a| grid.mode_index(peak_idx[a]) as f64).collect();
            let lag = refine_lag(grid, &corr_hat, &start, sign as f64);
            let offset: Vec<f64> = lag.iter().map(|&t| t * h).collect();
            let (shifted, _) = equilibria::embed_on_grid(profile, grid, &offset)?;
            let diff: Vec<f64> = component
                .u
                .iter()
                .zip(&shifted)
                .map(|(a, b)| a - sign as f64 * b)
                .collect();
            let residual = h1_norm(grid, &diff)?;
            if best.as_ref().map_or(true, |b| residual < b.3) {
                best = Some((name.clone(), sign, offset, residual));
            }
        }
    }
    let (name, sign, offset, residual) =
        best.ok_or_else(|| KgError::usage("no library entry matches the grid dimension"))?;
    // absolute refined center, folded back into [-L, L)
    let refined_center: Vec<f64> = component
        .center
        .iter()
        .zip(&offset)
        .map(|(c, o)| grid.wrap_displacement(c + o))
        .collect();
    let h1 = h1_norm(grid, &component.u)?;
    let matched = if h1 > 0.0 && residual <= UNMATCHED_RATIO * h1 {
        Some(name)
    } else {
        None
    };
    Ok(MatchReport {
        matched,
        sign,
        refined_center,
        residual,
        component_h_norm: component.h_norm,
    })
}

/// The Theorem-shaped output: detected centers, per-component matches, global
/// residual.
#[derive(Debug, Clone, Serialize)]
pub struct ResolutionDecomposition {
    pub time: f64,
    pub component_count: usize,
    pub components: Vec<MatchReport>,
    /// `|u - sum_j sign_j Q^j(x - x_j)|_{H^1}` computed directly.
    pub global_residual: f64,
    pub ut_l2: f64,
    /// Minimum pairwise distance between refined centers (None when J < 2).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_center_distance: Option<f64>,
}

/// Full pipeline: detect concentration points, split, match, assemble the
/// global residual.
pub fn decompose(
    state: &FieldState,
    config: &DiagnosticsConfig,
    library: &EquilibriumLibrary,
) -> Result<ResolutionDecomposition> {
    let grid = &state.grid;
    let detected = diagnostics::detect_concentration_points(state, config)?;
    let norms = field::norms(state)?;
    if detected.count() == 0 {
        return Ok(ResolutionDecomposition {
            time: state.time,
            component_count: 0,
            components: Vec::new(),
            // same spectral H^1 norm the matched branch uses for its residual
            global_residual: h1_norm(grid, &state.u)?,
            ut_l2: norms.l2_ut,
            min_center_distance: None,
        });
    }
    let components = split_components(state, &detected.centers)?;
    let mut reports = Vec::with_capacity(components.len());
    let mut templates: Vec<Option<Vec<f64>>> = Vec::with_capacity(components.len());
    for comp in &components {
        let report = match_equilibrium(comp, library, grid)?;
        let template = match &report.matched {
            Some(name) => {
                let profile = &library
                    .entries
                    .iter()
                    .find(|(n, _)| n == name)
                    .expect("matched name comes from the library")
                    .1;
                let (q, _) = equilibria::embed_on_grid(profile, grid, &report.refined_center)?;
                Some(q.iter().map(|&v| report.sign as f64 * v).collect())
            }
            None => None,
        };
        templates.push(template);
        reports.push(report);
    }
    // the partition weights slightly deform each component and bias its
    // correlation peak; re-refine every center against the full field with the
    // other templates subtracted, which removes that bias
    let h = grid.spacing();
    for _sweep in 0..2 {
        for j in 0..reports.len() {
            let Some(name) = reports[j].matched.clone() else { continue };
            let profile =
                &library.entries.iter().find(|(n, _)| n == &name).expect("library entry").1;
            let mut rest = state.u.clone();
            for (l, t) in templates.iter().enumerate() {
                if l != j {
                    if let Some(t) = t {
                        for (r, v) in rest.iter_mut().zip(t.iter()) {
                            *r -= v;
                        }
                    }
                }
            }
            let r_hat = spectral::forward(grid, &rest)?;
            let (q, _) = equilibria::embed_on_grid(profile, grid, &vec![0.0; grid.dimension()])?;
            let q_hat = spectral::forward(grid, &q)?;
            let corr_hat: Vec<Complex64> =
                r_hat.iter().zip(&q_hat).map(|(a, b)| a * b.conj()).collect();
            let start: Vec<f64> = reports[j].refined_center.iter().map(|&c| c / h).collect();
            let lag = refine_lag(grid, &corr_hat, &start, reports[j].sign as f64);
            let center: Vec<f64> =
                lag.iter().map(|&t| grid.wrap_displacement(t * h)).collect();
            let (q, _) = equilibria::embed_on_grid(profile, grid, &center)?;
            templates[j] = Some(q.iter().map(|&v| reports[j].sign as f64 * v).collect());
            reports[j].refined_center = center;
        }
    }
    let mut model = vec![0.0; grid.len()];
    for t in templates.iter().flatten() {
        for (m, v) in model.iter_mut().zip(t.iter()) {
            *m += v;
        }
    }
    let diff: Vec<f64> = state.u.iter().zip(&model).map(|(a, b)| a - b).collect();
    let global_residual = h1_norm(grid, &diff)?;
    let mut min_dist = None;
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let d = grid.periodic_distance(&reports[i].refined_center, &reports[j].refined_center);
            min_dist = Some(min_dist.map_or(d, |m: f64| m.min(d)));
        }
    }
    Ok(ResolutionDecomposition {
        time: state.time,
        component_count: reports.len(),
        components: reports,
        global_residual,
        ut_l2: norms.l2_ut,
        min_center_distance: min_dist,
    })
}

/// Theorem 1.1 trichotomy verdict with its supporting metric.
#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum TrichotomyVerdict {
    Blowup { time: f64, trigger_value: f64 },
    UnboundedSuspected { growth_slope: f64 },
    Resolved { final_residual: f64, final_ut_l2: f64, component_count: usize },
    Undecided { final_residual: f64, final_ut_l2: f64, growth_slope: f64 },
}

/// Least-squares slope of `ln |u|_H` over the last half of the sampled run.
pub fn h_norm_growth_slope(samples: &[TrajectorySample]) -> f64 {
    let t_end = samples.last().map_or(0.0, |s| s.time);
    let half: Vec<&TrajectorySample> = samples
        .iter()
        .filter(|s| s.time >= t_end / 2.0 && s.norms.h_norm > 0.0)
        .collect();
    if half.len() < 2 {
        return 0.0;
    }
    let n = half.len() as f64;
    let mean_t = half.iter().map(|s| s.time).sum::<f64>() / n;
    let mean_y = half.iter().map(|s| s.norms.h_norm.ln()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for s in &half {
        let dt = s.time - mean_t;
        num += dt * (s.norms.h_norm.ln() - mean_y);
        den += dt * dt;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Classify a completed run.
pub fn classify(
    samples: &[TrajectorySample],
    blowup: Option<&BlowupReport>,
    final_decomposition: Option<&ResolutionDecomposition>,
) -> TrichotomyVerdict {
    if let Some(report) = blowup {
        return TrichotomyVerdict::Blowup {
            time: report.time,
            trigger_value: report.trigger_value,
        };
    }
    let slope = h_norm_growth_slope(samples);
    if slope > GROWTH_SLOPE_TOL {
        return TrichotomyVerdict::UnboundedSuspected { growth_slope: slope };
    }
    let (residual, ut_l2, count) = match final_decomposition {
        Some(d) => (d.global_residual, d.ut_l2, d.component_count),
        None => {
            let last = samples.last();
            (f64::INFINITY, last.map_or(f64::INFINITY, |s| s.norms.l2_ut), 0)
        }
    };
    if ut_l2 <= RESOLVED_UT_TOL && residual <= RESOLVED_RESIDUAL_TOL {
        TrichotomyVerdict::Resolved {
            final_residual: residual,
            final_ut_l2: ut_l2,
            component_count: count,
        }
    } else {
        TrichotomyVerdict::Undecided {
            final_residual: residual,
            final_ut_l2: ut_l2,
            growth_slope: slope,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn grid() -> Arc<SpectralGrid> {
        Arc::new(SpectralGrid::new(1, 1024, 80.0).unwrap())
    }

    fn soliton_pair_state(grid: &Arc<SpectralGrid>, a: f64) -> FieldState {
        let profile = equilibria::closed_form_ground_state_1d(3.0).unwrap();
        let (qp, _) = equilibria::embed_on_grid(&profile, grid, &[a]).unwrap();
        let (qm, _) = equilibria::embed_on_grid(&profile, grid, &[-a]).unwrap();
        let u: Vec<f64> = qp.iter().zip(&qm).map(|(x, y)| x + y).collect();
        FieldState::new(grid.clone(), u, vec![0.0; grid.len()], 3.0, 0.1).unwrap()
    }

    #[test]
    fn weights_sum_to_one() {
        let g = grid();
        let centers = vec![vec![-20.0], vec![5.0], vec![33.3]];
        let weights = partition_weights(&g, &centers).unwrap();
        for flat in (0..g.len()).step_by(7) {
            let total: f64 = weights.iter().map(|w| w[flat]).sum();
            assert!((total - 1.0).abs() <= 1e-12);
            for w in &weights {
                assert!(w[flat] > 0.0 && w[flat] <= 1.0);
            }
        }
        assert!(partition_weights(&g, &[vec![1.0], vec![1.0]]).is_err());
        assert!(partition_weights(&g, &[]).is_err());
    }

    #[test]
    fn single_center_weight_is_identity() {
        let g = grid();
        let weights = partition_weights(&g, &[vec![3.0]]).unwrap();
        assert!(weights[0].iter().all(|&w| (w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn symmetric_pair_splits_evenly_at_origin() {
        let g = grid();
        let a = 10.0;
        let weights = partition_weights(&g, &[vec![a], vec![-a]]).unwrap();
        let mid = g.len() / 2; // x = 0
        assert!((weights[0][mid] - 0.5).abs() < 1e-12);
        assert!((weights[1][mid] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn components_reconstruct_exactly() {
        let g = grid();
        let state = soliton_pair_state(&g, 20.0);
        let comps = split_components(&state, &[vec![20.0], vec![-20.0]]).unwrap();
        let (u, ut) = reconstruct(&g, &comps).unwrap();
        for i in 0..g.len() {
            assert!((u[i] - state.u[i]).abs() <= 1e-10);
            assert!((ut[i] - state.ut[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn isolated_soliton_component_is_the_soliton() {
        let g = grid();
        let profile = equilibria::closed_form_ground_state_1d(3.0).unwrap();
        let (q, _) = equilibria::embed_on_grid(&profile, &g, &[12.5]).unwrap();
        let state = FieldState::new(g.clone(), q, vec![0.0; g.len()], 3.0, 0.1).unwrap();
        let comps = split_components(&state, &[vec![12.5]]).unwrap();
        let (q0, _) = equilibria::embed_on_grid(&profile, &g, &[0.0]).unwrap();
        let diff: Vec<f64> = comps[0].u.iter().zip(&q0).map(|(a, b)| a - b).collect();
        assert!(h1_norm(&g, &diff).unwrap() <= 1e-3);
    }

    #[test]
    fn matcher_finds_subcell_offsets_and_signs() {
        let g = grid();
        let profile = equilibria::closed_form_ground_state_1d(3.0).unwrap();
        let library = EquilibriumLibrary::standard(1, 3.0).unwrap();
        let offset = 0.3 * g.spacing();
        let (q, _) = equilibria::embed_on_grid(&profile, &g, &[offset]).unwrap();
        let comp = Component {
            center: vec![0.0],
            u: q.clone(),
            ut: vec![0.0; g.len()],
            h_norm: h1_norm(&g, &q).unwrap(),
        };
        let report = match_equilibrium(&comp, &library, &g).unwrap();
        assert_eq!(report.matched.as_deref(), Some("ground"));
        assert_eq!(report.sign, 1);
        assert!((report.refined_center[0] - offset).abs() <= 0.05 * g.spacing());
        assert!(report.residual <= 1e-6, "residual {}", report.residual);
        // sign flip
        let neg = Component {
            center: vec![0.0],
            u: q.iter().map(|v| -v).collect(),
            ut: vec![0.0; g.len()],
            h_norm: comp.h_norm,
        };
        let report = match_equilibrium(&neg, &library, &g).unwrap();
        assert_eq!(report.matched.as_deref(), Some("ground"));
        assert_eq!(report.sign, -1);
    }

    #[test]
    fn radiation_component_is_unmatched() {
        let g = grid();
        let library = EquilibriumLibrary::standard(1, 3.0).unwrap();
        let u: Vec<f64> = g
            .axis_coords()
            .iter()
            .map(|&x| 0.02 * ((0.9 * x).sin() + 0.5 * (1.7 * x).cos()))
            .collect();
        let comp = Component {
            center: vec![0.0],
            u: u.clone(),
            ut: vec![0.0; g.len()],
            h_norm: h1_norm(&g, &u).unwrap(),
        };
        let report = match_equilibrium(&comp, &library, &g).unwrap();
        assert!(report.matched.is_none(), "radiation matched {:?}", report.matched);
    }

    #[test]
    fn decompose_two_soliton_state() {
        let g = grid();
        let library = EquilibriumLibrary::standard(1, 3.0).unwrap();
        let state = soliton_pair_state(&g, 20.0);
        let config = DiagnosticsConfig::default();
        let decomp = decompose(&state, &config, &library).unwrap();
        assert_eq!(decomp.component_count, 2);
        for c in &decomp.components {
            assert_eq!(c.matched.as_deref(), Some("ground"));
        }
        assert!(decomp.global_residual <= 1e-3, "residual {}", decomp.global_residual);
        assert!((decomp.min_center_distance.unwrap() - 40.0).abs() < 0.5);
    }

    #[test]
    fn decompose_zero_and_radiation_states() {
        let g = grid();
        let library = EquilibriumLibrary::standard(1, 3.0).unwrap();
        let zero = FieldState::zero(g.clone(), 3.0, 0.1).unwrap();
        let d = decompose(&zero, &DiagnosticsConfig::default(), &library).unwrap();
        assert_eq!(d.component_count, 0);
        assert_eq!(d.global_residual, 0.0);
        // sub-threshold radiation: J = 0, residual equals the H^1 norm
        let u: Vec<f64> = g.axis_coords().iter().map(|&x| 1e-5 * (0.5 * x).sin()).collect();
        let s = FieldState::new(g.clone(), u.clone(), vec![0.0; g.len()], 3.0, 0.1).unwrap();
        let d = decompose(&s, &DiagnosticsConfig::default(), &library).unwrap();
        assert_eq!(d.component_count, 0);
        assert!((d.global_residual - h1_norm(&g, &u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn decompose_equivariance() {
        let g = grid();
        let library = EquilibriumLibrary::standard(1, 3.0).unwrap();
        let state = soliton_pair_state(&g, 20.0);
        let config = DiagnosticsConfig::default();
        let base = decompose(&state, &config, &library).unwrap();
        // translation equivariance (grid-aligned shift keeps everything exact)
        let shift = 16.0 * g.spacing();
        let mut shifted = state.clone();
        shifted.u = spectral::translate(&g, &state.u, &[shift]).unwrap();
        shifted.ut = spectral::translate(&g, &state.ut, &[shift]).unwrap();
        let moved = decompose(&shifted, &config, &library).unwrap();
        assert_eq!(moved.component_count, base.component_count);
        assert!((moved.global_residual - base.global_residual).abs() <= 1e-8);
        let mut base_centers: Vec<f64> = base
            .components
            .iter()
            .map(|c| g.wrap_displacement(c.refined_center[0] + shift))
            .collect();
        let mut moved_centers: Vec<f64> =
            moved.components.iter().map(|c| c.refined_center[0]).collect();
        base_centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        moved_centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in base_centers.iter().zip(&moved_centers) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
        // sign equivariance
        let mut flipped = state.clone();
        flipped.u.iter_mut().for_each(|v| *v = -*v);
        flipped.ut.iter_mut().for_each(|v| *v = -*v);
        let neg = decompose(&flipped, &config, &library).unwrap();
        assert_eq!(neg.component_count, base.component_count);
        assert!((neg.global_residual - base.global_residual).abs() <= 1e-8);
        for (a, b) in base.components.iter().zip(&neg.components) {
            assert_eq!(a.sign, -b.sign);
        }
    }

    #[test]
    fn classifier_branches() {
        use crate::field::NormReport;
        let mk = |time: f64, h: f64| TrajectorySample {
            time,
            norms: NormReport { l2_u: 0.0, h1_u: 0.0, l2_ut: 0.0, linf_u: 0.0, h_norm: h },
            energy: 0.0,
            dissipation: 0.0,
        };
        let blow = BlowupReport { time: 3.2, trigger_value: 2e6 };
        assert!(matches!(
            classify(&[], Some(&blow), None),
            TrichotomyVerdict::Blowup { .. }
        ));
        // growing H-norm
        let growing: Vec<_> = (0..100).map(|i| mk(i as f64, (0.05 * i as f64).exp())).collect();
        assert!(matches!(
            classify(&growing, None, None),
            TrichotomyVerdict::UnboundedSuspected { .. }
        ));
        // flat run with a clean decomposition
        let flat: Vec<_> = (0..100).map(|i| mk(i as f64, 2.0)).collect();
        let d = ResolutionDecomposition {
            time: 99.0,
            component_count: 1,
            components: vec![],
            global_residual: 1e-4,
            ut_l2: 1e-5,
            min_center_distance: None,
        };
        assert!(matches!(
            classify(&flat, None, Some(&d)),
            TrichotomyVerdict::Resolved { .. }
        ));
        // thresholds not met
        let d2 = ResolutionDecomposition { global_residual: 0.3, ..d };
        assert!(matches!(
            classify(&flat, None, Some(&d2)),
            TrichotomyVerdict::Undecided { .. }
        ));
    }
}
