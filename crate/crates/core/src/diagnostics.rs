//! Numerical localization diagnostics: frequency tails, good times,
//! concentration points and exterior energy.

use crate::error::{KgError, Result};
use crate::evolution::TrajectorySample;
use crate::field::{self, FieldState};
use crate::projector::{self, ProjectorSpec};
use serde::{Deserialize, Serialize};

/// Threshold hierarchy `mu0 > mu1 > mu2 > mu3 > mu4 > 0` and detection
/// parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub mu: [f64; 5],
    /// Low-pass cutoff used by the detector; `None` means Nyquist/8.
    pub detection_cutoff: Option<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { mu: [1e-1, 1e-2, 1e-3, 1e-4, 1e-5], detection_cutoff: None }
    }
}

impl DiagnosticsConfig {
    pub fn validate(&self) -> Result<()> {
        let m = &self.mu;
        let ordered = m[4] > 0.0 && m[0] > m[1] && m[1] > m[2] && m[2] > m[3] && m[3] > m[4];
        if !ordered {
            return Err(KgError::usage(format!(
                "thresholds must satisfy mu0 > mu1 > mu2 > mu3 > mu4 > 0, got {m:?}"
            )));
        }
        Ok(())
    }

    /// Amplitude threshold for the detector.
    pub fn amplitude_threshold(&self) -> f64 {
        self.mu[3]
    }

    /// Separation radius `2 / mu3`, capped at a quarter of the box.
    pub fn separation_radius(&self, grid: &crate::grid::SpectralGrid) -> f64 {
        (2.0 / self.mu[3]).min(2.0 * grid.half_length() / 4.0)
    }
}

/// A maximal separated set of low-frequency concentration points.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationSet {
    pub time: f64,
    pub centers: Vec<Vec<f64>>,
    /// `|P_{<N} u|` at each center.
    pub amplitudes: Vec<f64>,
    pub separation_radius: f64,
}

impl ConcentrationSet {
    pub fn count(&self) -> usize {
        self.centers.len()
    }

    pub fn min_pairwise_distance(&self, grid: &crate::grid::SpectralGrid) -> Option<f64> {
        let mut min = None;
        for i in 0..self.centers.len() {
            for j in i + 1..self.centers.len() {
                let d = grid.periodic_distance(&self.centers[i], &self.centers[j]);
                min = Some(min.map_or(d, |m: f64| m.min(d)));
            }
        }
        min
    }
}

/// `(|P_{>=N} u|_{H^1}, |P_{>=N} u_t|_{L^2})`.
pub fn frequency_tail(state: &FieldState, cutoff: f64, sharp: bool) -> Result<(f64, f64)> {
    let grid = &state.grid;
    let mut spec = ProjectorSpec::high(cutoff);
    if sharp {
        spec = spec.sharp();
    }
    let u_tail = projector::apply(grid, &state.u, &spec)?;
    let ut_tail = projector::apply(grid, &state.ut, &spec)?;
    let mut tail_state = state.clone();
    tail_state.u = u_tail;
    tail_state.ut = ut_tail;
    let norms = field::norms(&tail_state)?;
    Ok((norms.h1_u, norms.l2_ut))
}

/// A time in a window where `|u_t|_2` is smallest among the samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GoodTime {
    pub window: (f64, f64),
    pub selected: f64,
    pub ut_l2: f64,
}

/// Pick the sampled time in `[center - width, center + width]` minimizing
/// `|u_t|_2`; ties go to the earliest sample.
pub fn select_good_time(
    samples: &[TrajectorySample],
    center: f64,
    width: f64,
) -> Result<GoodTime> {
    let lo = center - width;
    let hi = center + width;
    let mut best: Option<(f64, f64)> = None;
    for s in samples {
        if s.time < lo || s.time > hi {
            continue;
        }
        let v = s.norms.l2_ut;
        match best {
            Some((_, bv)) if v >= bv => {}
            _ => best = Some((s.time, v)),
        }
    }
    let (selected, ut_l2) = best
        .ok_or_else(|| KgError::usage(format!("no samples in window [{lo}, {hi}]")))?;
    Ok(GoodTime { window: (lo, hi), selected, ut_l2 })
}

/// Greedy maximal separated set of grid points whose low-pass amplitude
/// reaches `mu3`.
///
/// Candidates are ordered by amplitude descending with lexicographic index
/// tie-break, so the result is deterministic; an empty set means J = 0.
pub fn detect_concentration_points(
    state: &FieldState,
    config: &DiagnosticsConfig,
) -> Result<ConcentrationSet> {
    config.validate()?;
    let grid = &state.grid;
    let cutoff = config.detection_cutoff.unwrap_or(grid.nyquist() / 8.0);
    let smooth = projector::apply(grid, &state.u, &ProjectorSpec::low(cutoff))?;
    let threshold = config.amplitude_threshold();
    let radius = config.separation_radius(grid);
    let mut candidates: Vec<(usize, f64)> = smooth
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() >= threshold)
        .map(|(i, v)| (i, v.abs()))
        .collect();
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut amplitudes = Vec::new();
    for (flat, amp) in candidates {
        let x = grid.point(flat);
        if centers.iter().all(|c| grid.periodic_distance(c, &x) >= radius) {
            centers.push(x);
            amplitudes.push(amp);
        }
    }
    Ok(ConcentrationSet { time: state.time, centers, amplitudes, separation_radius: radius })
}

/// Quadrature of the local energy density over the region farther than
/// `radius` from every center.
pub fn exterior_energy(state: &FieldState, centers: &[Vec<f64>], radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(KgError::usage(format!("exterior radius must be positive, got {radius}")));
    }
    let distance = field::distance_field(&state.grid, centers)?;
    let density = field::local_energy_density(state)?;
    let sum: f64 = density
        .iter()
        .zip(distance.iter())
        .filter(|(_, &d)| d > radius)
        .map(|(&e, _)| e)
        .sum();
    Ok(sum * state.grid.cell_volume())
}

/// Trapezoid integral of the sampled `|u_t|_2^2` over `[from, to]`, with
/// linear interpolation of the integrand at the endpoints.
pub fn dissipation_integral(samples: &[TrajectorySample], from: f64, to: f64) -> Result<f64> {
    if samples.is_empty() || from > to {
        return Err(KgError::usage("empty samples or inverted interval"));
    }
    let t0 = samples.first().unwrap().time;
    let t1 = samples.last().unwrap().time;
    if from < t0 - 1e-12 || to > t1 + 1e-12 {
        return Err(KgError::usage(format!(
            "interval [{from}, {to}] not covered by samples [{t0}, {t1}]"
        )));
    }
    let value = |i: usize| samples[i].norms.l2_ut * samples[i].norms.l2_ut;
    // integrand linearly interpolated at an arbitrary time
    let at = |t: f64| -> f64 {
        let j = samples.partition_point(|s| s.time <= t);
        if j == 0 {
            return value(0);
        }
        if j >= samples.len() {
            return value(samples.len() - 1);
        }
        let (ta, tb) = (samples[j - 1].time, samples[j].time);
        let w = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
        value(j - 1) * (1.0 - w) + value(j) * w
    };
    let mut total = 0.0;
    let mut prev_t = from;
    let mut prev_v = at(from);
    for (i, s) in samples.iter().enumerate() {
        if s.time <= from || s.time >= to {
            continue;
        }
        total += 0.5 * (prev_v + value(i)) * (s.time - prev_t);
        prev_t = s.time;
        prev_v = value(i);
    }
    total += 0.5 * (prev_v + at(to)) * (to - prev_t);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria;
    use crate::field::NormReport;
    use crate::grid::SpectralGrid;
    use std::sync::Arc;

    fn sample(time: f64, l2_ut: f64) -> TrajectorySample {
        TrajectorySample {
            time,
            norms: NormReport { l2_u: 0.0, h1_u: 0.0, l2_ut, linf_u: 0.0, h_norm: l2_ut },
            energy: 0.0,
            dissipation: 0.0,
        }
    }

    #[test]
    fn config_ordering_enforced() {
        assert!(DiagnosticsConfig::default().validate().is_ok());
        let bad = DiagnosticsConfig { mu: [1e-1, 1e-1, 1e-3, 1e-4, 1e-5], ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn band_limited_field_has_no_tail() {
        let grid = Arc::new(SpectralGrid::new(1, 256, 10.0).unwrap());
        let k1 = 2.0 * std::f64::consts::PI / grid.half_length();
        let u: Vec<f64> = grid.axis_coords().iter().map(|&x| (k1 * x).cos()).collect();
        let s = FieldState::new(grid.clone(), u, vec![0.0; grid.len()], 3.0, 0.0).unwrap();
        // cutoff far above the only occupied mode
        let (h1, l2) = frequency_tail(&s, grid.nyquist() / 2.0, false).unwrap();
        assert!(h1 <= 1e-12, "tail {h1}");
        assert_eq!(l2, 0.0);
    }

    #[test]
    fn sharp_tail_is_monotone_in_cutoff() {
        let grid = Arc::new(SpectralGrid::new(1, 256, 20.0).unwrap());
        let u: Vec<f64> =
            grid.axis_coords().iter().map(|&x| (-x * x / 2.0).exp() * (3.0 * x).cos()).collect();
        let s = FieldState::new(grid.clone(), u, vec![0.0; grid.len()], 3.0, 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..20 {
            let cutoff = i as f64 * grid.nyquist() / 20.0;
            let (h1, _) = frequency_tail(&s, cutoff, true).unwrap();
            assert!(h1 <= prev + 1e-13, "tail grew at cutoff {cutoff}");
            prev = h1;
        }
    }

    #[test]
    fn good_time_tie_breaks_earliest() {
        let samples: Vec<_> = (0..10).map(|i| sample(i as f64, 1.0)).collect();
        let g = select_good_time(&samples, 5.0, 5.0).unwrap();
        assert_eq!(g.selected, 0.0);
        assert!(select_good_time(&samples, 100.0, 1.0).is_err());
    }

    #[test]
    fn good_time_scans_sin_series() {
        // |u_t|(t) = |sin t| on [0, pi] sampled at 0.1: minima at the ends
        let samples: Vec<_> =
            (0..32).map(|i| sample(i as f64 * 0.1, (i as f64 * 0.1).sin().abs())).collect();
        let g = select_good_time(&samples, 1.55, 1.56).unwrap();
        assert!(g.selected == 0.0 || (g.selected - 3.1).abs() < 1e-12, "t* = {}", g.selected);
        // min <= mean
        let mean: f64 =
            samples.iter().map(|s| s.norms.l2_ut).sum::<f64>() / samples.len() as f64;
        assert!(g.ut_l2 <= mean);
    }

    #[test]
    fn zero_field_detects_nothing() {
        let grid = Arc::new(SpectralGrid::new(1, 128, 20.0).unwrap());
        let s = FieldState::zero(grid, 3.0, 0.0).unwrap();
        let set = detect_concentration_points(&s, &DiagnosticsConfig::default()).unwrap();
        assert_eq!(set.count(), 0);
    }

    #[test]
    fn single_soliton_yields_one_center() {
        let grid = Arc::new(SpectralGrid::new(1, 512, 40.0).unwrap());
        let profile = equilibria::closed_form_ground_state_1d(3.0).unwrap();
        let a = 7.3;
        let (u, _) = equilibria::embed_on_grid(&profile, &grid, &[a]).unwrap();
        let s = FieldState::new(grid.clone(), u, vec![0.0; grid.len()], 3.0, 0.0).unwrap();
        let set = detect_concentration_points(&s, &DiagnosticsConfig::default()).unwrap();
        assert_eq!(set.count(), 1);
        assert!((set.centers[0][0] - a).abs() <= grid.spacing());
    }

    #[test]
    fn two_bumps_separated_centers() {
        let grid = Arc::new(SpectralGrid::new(1, 512, 40.0).unwrap());
        let u: Vec<f64> = grid
            .axis_coords()
            .iter()
            .map(|&x| (-(x - 20.0) * (x - 20.0)).exp() + (-(x + 20.0) * (x + 20.0)).exp())
            .collect();
        let s = FieldState::new(grid.clone(), u, vec![0.0; grid.len()], 3.0, 0.0).unwrap();
        let config = DiagnosticsConfig { mu: [0.5, 0.3, 0.2, 0.1, 0.01], ..Default::default() };
        let set = detect_concentration_points(&s, &config).unwrap();
        assert_eq!(set.count(), 2);
        let radius = set.separation_radius;
        assert!(set.min_pairwise_distance(&grid).unwrap() >= radius);
        // maximality: every above-threshold point is near an accepted center
        let smooth = projector::apply(
            &grid,
            &s.u,
            &ProjectorSpec::low(grid.nyquist() / 8.0),
        )
        .unwrap();
        for (flat, v) in smooth.iter().enumerate() {
            if v.abs() >= 0.1 {
                let x = grid.point(flat);
                assert!(set.centers.iter().any(|c| grid.periodic_distance(c, &x) < radius));
            }
        }
    }

    #[test]
    fn exterior_energy_behaviour() {
        let grid = Arc::new(SpectralGrid::new(1, 512, 40.0).unwrap());
        let profile = equilibria::closed_form_ground_state_1d(3.0).unwrap();
        let (u, _) = equilibria::embed_on_grid(&profile, &grid, &[0.0]).unwrap();
        let s = FieldState::new(grid.clone(), u, vec![0.0; grid.len()], 3.0, 0.0).unwrap();
        let total = field::norms(&s).unwrap().h_norm.powi(2);
        let ext = exterior_energy(&s, &[vec![0.0]], 10.0).unwrap();
        assert!(ext <= 1e-7 * total, "sech tail {ext}");
        // radius beyond the box leaves nothing
        assert_eq!(exterior_energy(&s, &[vec![0.0]], 100.0).unwrap(), 0.0);
        // monotone in radius and in the center set
        let e5 = exterior_energy(&s, &[vec![0.0]], 5.0).unwrap();
        let e8 = exterior_energy(&s, &[vec![0.0]], 8.0).unwrap();
        assert!(e8 <= e5);
        let with_extra = exterior_energy(&s, &[vec![0.0], vec![15.0]], 5.0).unwrap();
        assert!(with_extra <= e5);
        assert!(exterior_energy(&s, &[], 5.0).is_err());
    }

    #[test]
    fn dissipation_integral_additive() {
        let samples: Vec<_> = (0..101).map(|i| sample(i as f64 * 0.1, (i as f64 * 0.07).sin())).collect();
        let a = dissipation_integral(&samples, 0.0, 5.0).unwrap();
        let b = dissipation_integral(&samples, 5.0, 10.0).unwrap();
        let whole = dissipation_integral(&samples, 0.0, 10.0).unwrap();
        assert!((a + b - whole).abs() < 1e-12);
        assert!(dissipation_integral(&samples, -1.0, 5.0).is_err());
        // stationary run integrates to zero
        let flat: Vec<_> = (0..11).map(|i| sample(i as f64, 0.0)).collect();
        assert_eq!(dissipation_integral(&flat, 0.0, 10.0).unwrap(), 0.0);
    }
}
