//! Scenario execution: initial data assembly, evolution with observers, and
//! artifact emission (CSV series, reports, verdict, checkpoint).

use crate::config::{InitialData, ScenarioSpec};
use anyhow::{bail, Context, Result};
use kgr_core::diagnostics;
use kgr_core::equilibria::{self, EquilibriumProfile};
use kgr_core::evolution::{self, EvolutionConfig};
use kgr_core::field::{self, FieldState};
use kgr_core::grid::SpectralGrid;
use kgr_core::projector::ProjectorSpec;
use kgr_core::io;
use kgr_core::resolution::{self, EquilibriumLibrary, ResolutionDecomposition, TrichotomyVerdict};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

/// Amplitude at the box boundary above which the periodic approximation of
/// R^d is considered suspect.
const BOUNDARY_WARN: f64 = 1e-10;

pub fn profile_for(d: usize, p: f64, nodes: usize) -> Result<EquilibriumProfile> {
    let profile = if d == 1 && nodes == 0 {
        equilibria::closed_form_ground_state_1d(p)?
    } else {
        equilibria::radial_shoot(d, p, nodes, &Default::default())?
    };
    Ok(profile)
}

fn pad_center(center: &[f64], d: usize) -> Vec<f64> {
    let mut c = center.to_vec();
    c.resize(d, 0.0);
    c
}

/// Build `(u0, u1)` from the recipe. Returns the state and any warnings.
pub fn build_initial(spec: &ScenarioSpec) -> Result<(FieldState, Vec<String>)> {
    let d = spec.model.dimension;
    let p = spec.model.exponent;
    let alpha = spec.model.damping;
    let grid = Arc::new(SpectralGrid::new(d, spec.grid.points, spec.grid.half_length)?);
    let mut warnings = Vec::new();

    let mut state = match &spec.initial {
        InitialData::Equilibrium { center, sign, nodes } => {
            let mut profile = profile_for(d, p, *nodes)?;
            profile.sign = *sign;
            let (u, _) = equilibria::embed_on_grid(&profile, &grid, &pad_center(center, d))?;
            FieldState::new(grid.clone(), u, vec![0.0; grid.len()], p, alpha)?
        }
        InitialData::MultiBump { bumps } => {
            if bumps.is_empty() {
                bail!("initial.bumps: multi-bump recipe needs at least one bump");
            }
            let mut u = vec![0.0; grid.len()];
            for bump in bumps {
                let mut profile = profile_for(d, p, bump.nodes)?;
                profile.sign = bump.sign;
                let (q, _) =
                    equilibria::embed_on_grid(&profile, &grid, &pad_center(&bump.center, d))?;
                for (a, b) in u.iter_mut().zip(&q) {
                    *a += b;
                }
            }
            FieldState::new(grid.clone(), u, vec![0.0; grid.len()], p, alpha)?
        }
        InitialData::Gaussian { amplitude, width, center } => {
            if !(*width > 0.0) {
                bail!("initial.width: must be positive, got {width}");
            }
            let c = pad_center(center, d);
            let u: Vec<f64> = (0..grid.len())
                .map(|flat| {
                    let x = grid.point(flat);
                    let r = grid.periodic_distance(&x, &c);
                    amplitude * (-r * r / (width * width)).exp()
                })
                .collect();
            FieldState::new(grid.clone(), u, vec![0.0; grid.len()], p, alpha)?
        }
        InitialData::PerturbedEquilibrium { eps, mode } => {
            let profile = profile_for(d, p, 0)?;
            let (q, _) = equilibria::embed_on_grid(&profile, &grid, &vec![0.0; d])?;
            let k = std::f64::consts::PI * *mode as f64 / grid.half_length();
            let u: Vec<f64> = (0..grid.len())
                .map(|flat| {
                    let x = grid.point(flat);
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    q[flat] + eps * (k * x[0]).cos() * (-r2 / 4.0).exp()
                })
                .collect();
            FieldState::new(grid.clone(), u, vec![0.0; grid.len()], p, alpha)?
        }
        InitialData::FromCheckpoint { path } => {
            let (state, _) = io::read_checkpoint(path)
                .with_context(|| format!("loading checkpoint {}", path.display()))?;
            let g = &state.grid;
            if g.dimension() != d
                || g.points_per_axis() != spec.grid.points
                || (g.half_length() - spec.grid.half_length).abs() > 1e-12
                || (state.exponent - p).abs() > 1e-12
                || (state.damping - alpha).abs() > 1e-12
            {
                bail!(
                    "initial.path: checkpoint (d={}, n={}, L={}, p={}, alpha={}) disagrees \
                     with the config",
                    g.dimension(),
                    g.points_per_axis(),
                    g.half_length(),
                    state.exponent,
                    state.damping
                );
            }
            state
        }
    };

    if spec.noise > 0.0 {
        // seeded low-frequency noise, sup-normalized then scaled
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
        let white: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let smooth =
            kgr_core::projector::apply(&grid, &white, &ProjectorSpec::low(grid.nyquist() / 8.0))?;
        let sup = smooth.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for (u, w) in state.u.iter_mut().zip(&smooth) {
            *u += spec.noise * w / sup;
        }
    }

    // boundary-density check: the periodic box should look like R^d
    let mut edge = 0.0f64;
    for flat in 0..grid.len() {
        let idx = grid.unravel(flat);
        if (0..d).any(|a| idx[a] == 0) {
            edge = edge.max(state.u[flat].abs()).max(state.ut[flat].abs());
        }
    }
    if edge > BOUNDARY_WARN {
        warnings.push(format!(
            "initial data reaches {edge:.3e} at the box boundary (threshold {BOUNDARY_WARN:.0e}); \
             increase grid.half_length"
        ));
    }
    Ok((state, warnings))
}

/// One CSV row; `None` fields print empty.
struct SeriesRow {
    t: f64,
    energy: f64,
    l2_ut: f64,
    h1_u: f64,
    linf_u: f64,
    h_norm: f64,
    diss_integral: f64,
    tail_h1: f64,
    j: usize,
    min_sep: Option<f64>,
    global_residual: f64,
}

pub const CSV_HEADER: &str =
    "t,energy,l2_ut,h1_u,linf_u,H_norm,diss_integral,tail_h1,J,min_sep,global_residual";

fn csv_line(row: &SeriesRow) -> String {
    let mut line = String::new();
    let _ = write!(
        line,
        "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
        row.t,
        row.energy,
        row.l2_ut,
        row.h1_u,
        row.linf_u,
        row.h_norm,
        row.diss_integral,
        row.tail_h1,
        row.j
    );
    match row.min_sep {
        Some(v) => {
            let _ = write!(line, ",{v:.12e}");
        }
        None => line.push(','),
    }
    let _ = write!(line, ",{:.12e}", row.global_residual);
    line
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub verdict: TrichotomyVerdict,
    pub samples: usize,
    pub final_time: f64,
    pub final_h_norm: f64,
    pub wall_seconds: f64,
    pub warnings: Vec<String>,
}

/// Execute a scenario end to end, writing all artifacts into
/// `spec.output.dir`. Returns the summary written to `report.toml`.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<RunSummary> {
    let started = std::time::Instant::now();
    spec.validate()?;
    let out_dir = &spec.output.dir;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;

    // config echo first: every default the run used, on disk before anything
    // can fail
    std::fs::write(out_dir.join("config_echo.toml"), toml::to_string_pretty(spec)?)?;

    let (initial, warnings) = build_initial(spec)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let library = EquilibriumLibrary::standard(spec.model.dimension, spec.model.exponent)?;
    let diag = spec.diagnostics_config();
    let tail_cutoff = initial.grid.nyquist() / 4.0;

    let config = EvolutionConfig {
        dt: spec.time.dt,
        // time.final_time is absolute; resumed checkpoints only run the rest
        final_time: (spec.time.final_time - initial.time).max(0.0),
        blowup_threshold: spec.time.blowup_threshold,
        callback_stride: spec.time.stride,
        ..Default::default()
    };

    let mut rows: Vec<SeriesRow> = Vec::new();
    let mut last_decomp: Option<ResolutionDecomposition> = None;
    let mut observer_error: Option<anyhow::Error> = None;
    let outcome = evolution::evolve(&initial, &config, |sample, state| {
        if observer_error.is_some() {
            return;
        }
        let observed = (|| -> Result<()> {
            let (tail_h1, _) = diagnostics::frequency_tail(state, tail_cutoff, false)?;
            let decomp = resolution::decompose(state, &diag, &library)?;
            rows.push(SeriesRow {
                t: sample.time,
                energy: sample.energy,
                l2_ut: sample.norms.l2_ut,
                h1_u: sample.norms.h1_u,
                linf_u: sample.norms.linf_u,
                h_norm: sample.norms.h_norm,
                diss_integral: sample.dissipation,
                tail_h1,
                j: decomp.component_count,
                min_sep: decomp.min_center_distance,
                global_residual: decomp.global_residual,
            });
            last_decomp = Some(decomp);
            Ok(())
        })();
        if let Err(e) = observed {
            observer_error = Some(e);
        }
    })?;
    if let Some(e) = observer_error {
        return Err(e.context("per-sample diagnostics failed"));
    }

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&csv_line(row));
        csv.push('\n');
    }
    std::fs::write(out_dir.join("series.csv"), csv)?;

    let final_decomp = if outcome.blowup.is_some() { None } else { last_decomp.as_ref() };
    let verdict = resolution::classify(&outcome.samples, outcome.blowup.as_ref(), final_decomp);
    std::fs::write(out_dir.join("verdict.toml"), toml::to_string_pretty(&verdict)?)?;
    if let Some(decomp) = final_decomp {
        std::fs::write(out_dir.join("decomposition.toml"), decomposition_report(decomp)?)?;
    }
    io::write_checkpoint(&out_dir.join("final.dkgc"), &outcome.final_state, spec.time.dt)?;

    let summary = RunSummary {
        name: spec.name.clone(),
        verdict,
        samples: outcome.samples.len(),
        final_time: outcome.samples.last().map_or(initial.time, |s| s.time),
        final_h_norm: outcome.samples.last().map_or(0.0, |s| s.norms.h_norm),
        wall_seconds: started.elapsed().as_secs_f64(),
        warnings,
    };
    std::fs::write(out_dir.join("report.toml"), toml::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Structured-text rendering of a decomposition.
pub fn decomposition_report(decomp: &ResolutionDecomposition) -> Result<String> {
    Ok(toml::to_string_pretty(decomp)?)
}

/// `diagnose`: localization diagnostics of a single checkpoint.
pub fn diagnose_checkpoint(path: &Path, radius: f64, out: Option<&Path>) -> Result<String> {
    let (state, _) = io::read_checkpoint(path)?;
    let norms = field::norms(&state)?;
    let energy = field::energy(&state)?;
    let cutoff = state.grid.nyquist() / 4.0;
    let (tail_h1, tail_ut) = diagnostics::frequency_tail(&state, cutoff, false)?;
    let set = diagnostics::detect_concentration_points(&state, &Default::default())?;
    let exterior = if set.count() > 0 {
        Some(diagnostics::exterior_energy(&state, &set.centers, radius)?)
    } else {
        None
    };

    #[derive(Serialize)]
    struct Diagnose<'a> {
        time: f64,
        energy: f64,
        l2_ut: f64,
        h1_u: f64,
        h_norm: f64,
        tail_cutoff: f64,
        tail_h1: f64,
        tail_ut_l2: f64,
        component_count: usize,
        centers: &'a [Vec<f64>],
        exterior_radius: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        exterior_energy: Option<f64>,
    }
    let text = toml::to_string_pretty(&Diagnose {
        time: state.time,
        energy,
        l2_ut: norms.l2_ut,
        h1_u: norms.h1_u,
        h_norm: norms.h_norm,
        tail_cutoff: cutoff,
        tail_h1,
        tail_ut_l2: tail_ut,
        component_count: set.count(),
        centers: &set.centers,
        exterior_radius: radius,
        exterior_energy: exterior,
    })?;
    if let Some(out) = out {
        std::fs::create_dir_all(out)?;
        std::fs::write(out.join("diagnostics.toml"), &text)?;
    }
    Ok(text)
}

/// `resolve`: decompose a checkpoint against the standard library.
pub fn resolve_checkpoint(path: &Path, out: Option<&Path>) -> Result<String> {
    let (state, _) = io::read_checkpoint(path)?;
    let library = EquilibriumLibrary::standard(state.grid.dimension(), state.exponent)?;
    let decomp = resolution::decompose(&state, &Default::default(), &library)?;
    let text = decomposition_report(&decomp)?;
    if let Some(out) = out {
        std::fs::create_dir_all(out)?;
        std::fs::write(out.join("decomposition.toml"), &text)?;
    }
    Ok(text)
}

/// `ground-state`: solve and persist one profile.
#[allow(clippy::too_many_arguments)]
pub fn ground_state(
    dimension: usize,
    exponent: f64,
    nodes: usize,
    method: &str,
    points: usize,
    half_length: f64,
    out: &Path,
) -> Result<EquilibriumProfile> {
    let profile = match method {
        "shoot" => equilibria::radial_shoot(dimension, exponent, nodes, &Default::default())?,
        "closed-form" => {
            if dimension != 1 || nodes != 0 {
                bail!("--method closed-form only covers the 1D ground state");
            }
            equilibria::closed_form_ground_state_1d(exponent)?
        }
        "petviashvili" => {
            if nodes != 0 {
                bail!("--method petviashvili only reaches the ground state");
            }
            let grid = SpectralGrid::new(dimension, points, half_length)?;
            let seed = equilibria::gaussian_seed(&grid, 1.0, 2.0);
            equilibria::petviashvili(&grid, exponent, &seed)?
        }
        other => bail!("unknown method {other:?}; use shoot, petviashvili or closed-form"),
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    io::write_profile(out, &profile)?;
    Ok(profile)
}
