//! Parameter sweeps: cartesian product of declared value lists, independent
//! runs on a worker pool, deterministic aggregated CSV.

use crate::config::{InitialData, ScenarioSpec};
use crate::run;
use anyhow::{bail, Context, Result};
use kgr_core::resolution::TrichotomyVerdict;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;

/// One axis of the sweep grid, in declared order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Damping,
    Dt,
    Amplitude,
    Eps,
    Noise,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Damping => "damping",
            Axis::Dt => "dt",
            Axis::Amplitude => "amplitude",
            Axis::Eps => "eps",
            Axis::Noise => "noise",
        }
    }
}

fn apply(spec: &mut ScenarioSpec, axis: Axis, value: f64) -> Result<()> {
    match axis {
        Axis::Damping => spec.model.damping = value,
        Axis::Dt => spec.time.dt = value,
        Axis::Amplitude => match &mut spec.initial {
            InitialData::Gaussian { amplitude, .. } => *amplitude = value,
            other => bail!(
                "sweep.amplitude requires a gaussian initial recipe, found {}",
                recipe_name(other)
            ),
        },
        Axis::Eps => match &mut spec.initial {
            InitialData::PerturbedEquilibrium { eps, .. } => *eps = value,
            other => bail!(
                "sweep.eps requires a perturbed-equilibrium initial recipe, found {}",
                recipe_name(other)
            ),
        },
        Axis::Noise => spec.noise = value,
    }
    Ok(())
}

fn recipe_name(initial: &InitialData) -> &'static str {
    match initial {
        InitialData::Equilibrium { .. } => "equilibrium",
        InitialData::MultiBump { .. } => "multi-bump",
        InitialData::Gaussian { .. } => "gaussian",
        InitialData::PerturbedEquilibrium { .. } => "perturbed-equilibrium",
        InitialData::FromCheckpoint { .. } => "from-checkpoint",
    }
}

struct RowResult {
    index: usize,
    values: Vec<f64>,
    status: String,
    verdict: Option<TrichotomyVerdict>,
    summary: Option<run::RunSummary>,
}

fn verdict_label(v: &TrichotomyVerdict) -> &'static str {
    match v {
        TrichotomyVerdict::Blowup { .. } => "blowup",
        TrichotomyVerdict::UnboundedSuspected { .. } => "unbounded-suspected",
        TrichotomyVerdict::Resolved { .. } => "resolved",
        TrichotomyVerdict::Undecided { .. } => "undecided",
    }
}

/// Run the sweep declared in `spec.sweep`; rows appear in cartesian-product
/// order regardless of worker scheduling. Per-row failures are recorded in the
/// table and do not abort the sweep.
pub fn run_sweep(spec: &ScenarioSpec, out_dir: &Path, workers: Option<usize>) -> Result<String> {
    let axes: Vec<(Axis, &[f64])> = [
        (Axis::Damping, spec.sweep.damping.as_slice()),
        (Axis::Dt, spec.sweep.dt.as_slice()),
        (Axis::Amplitude, spec.sweep.amplitude.as_slice()),
        (Axis::Eps, spec.sweep.eps.as_slice()),
        (Axis::Noise, spec.sweep.noise.as_slice()),
    ]
    .into_iter()
    .filter(|(_, values)| !values.is_empty())
    .collect();

    let mut header = String::from("row");
    for (axis, _) in &axes {
        let _ = write!(header, ",{}", axis.name());
    }
    header.push_str(",status,verdict,blowup_time,final_h_norm,final_ut_l2,growth_slope");

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating sweep dir {}", out_dir.display()))?;

    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    if axes.is_empty() || total == 0 {
        // empty grid: header-only table, exit 0
        let table = format!("{header}\n");
        std::fs::write(out_dir.join("sweep.csv"), &table)?;
        return Ok(table);
    }

    let combos: Vec<Vec<f64>> = (0..total)
        .map(|mut index| {
            let mut values = vec![0.0; axes.len()];
            // last axis varies fastest
            for (slot, (_, list)) in axes.iter().enumerate().rev() {
                values[slot] = list[index % list.len()];
                index /= list.len();
            }
            values
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .context("building sweep worker pool")?;
    let mut results: Vec<RowResult> = pool.install(|| {
        combos
            .par_iter()
            .enumerate()
            .map(|(index, values)| {
                let mut row_spec = spec.clone();
                row_spec.name = format!("{}-row{index:04}", spec.name);
                row_spec.output.dir = out_dir.join(format!("row-{index:04}"));
                let mut status = "ok".to_string();
                let mut summary = None;
                let outcome = (|| -> Result<run::RunSummary> {
                    for ((axis, _), &value) in axes.iter().zip(values.iter()) {
                        apply(&mut row_spec, *axis, value)?;
                    }
                    row_spec.validate()?;
                    run::run_scenario(&row_spec)
                })();
                match outcome {
                    Ok(s) => summary = Some(s),
                    Err(e) => status = format!("error: {e:#}").replace(['\n', ','], "; "),
                }
                RowResult {
                    index,
                    values: values.clone(),
                    status,
                    verdict: summary.as_ref().map(|s| s.verdict.clone()),
                    summary,
                }
            })
            .collect()
    });
    results.sort_by_key(|r| r.index);

    let mut table = format!("{header}\n");
    for row in &results {
        let _ = write!(table, "{}", row.index);
        for v in &row.values {
            let _ = write!(table, ",{v:.12e}");
        }
        let _ = write!(table, ",{}", row.status);
        match (&row.verdict, &row.summary) {
            (Some(v), Some(s)) => {
                let _ = write!(table, ",{}", verdict_label(v));
                let (blow_t, ut, slope) = verdict_metrics(v);
                for m in [blow_t, Some(s.final_h_norm), ut, slope] {
                    match m {
                        Some(x) => {
                            let _ = write!(table, ",{x:.12e}");
                        }
                        None => table.push(','),
                    }
                }
            }
            _ => table.push_str(",,,,,"),
        }
        table.push('\n');
    }
    std::fs::write(out_dir.join("sweep.csv"), &table)?;
    Ok(table)
}

fn verdict_metrics(v: &TrichotomyVerdict) -> (Option<f64>, Option<f64>, Option<f64>) {
    match v {
        TrichotomyVerdict::Blowup { time, .. } => (Some(*time), None, None),
        TrichotomyVerdict::UnboundedSuspected { growth_slope } => (None, None, Some(*growth_slope)),
        TrichotomyVerdict::Resolved { final_ut_l2, .. } => (None, Some(*final_ut_l2), None),
        TrichotomyVerdict::Undecided { final_ut_l2, growth_slope, .. } => {
            (None, Some(*final_ut_l2), Some(*growth_slope))
        }
    }
}
