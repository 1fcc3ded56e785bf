//! Scenario configuration: TOML parsing, environment overrides, validation.

use anyhow::{bail, Context, Result};
use kgr_core::diagnostics::DiagnosticsConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn default_name() -> String {
    "scenario".to_string()
}

fn default_sign() -> i8 {
    1
}

fn default_stride() -> usize {
    100
}

fn default_threshold() -> f64 {
    1e6
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_mu() -> [f64; 5] {
    DiagnosticsConfig::default().mu
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub dimension: usize,
    pub exponent: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_length: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub final_time: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
}

/// One bump of a multi-bump superposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    #[serde(default)]
    pub nodes: usize,
    pub center: Vec<f64>,
    #[serde(default = "default_sign")]
    pub sign: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Equilibrium {
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default = "default_sign")]
        sign: i8,
        #[serde(default)]
        nodes: usize,
    },
    MultiBump {
        bumps: Vec<BumpSpec>,
    },
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    PerturbedEquilibrium {
        eps: f64,
        #[serde(default)]
        mode: usize,
    },
    FromCheckpoint {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_mu")]
    pub mu: [f64; 5],
    #[serde(default)]
    pub detection_cutoff: Option<f64>,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection { mu: default_mu(), detection_cutoff: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_out() }
    }
}

/// Per-parameter value lists for the `sweep` subcommand; ignored by `evolve`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub damping: Vec<f64>,
    #[serde(default)]
    pub dt: Vec<f64>,
    #[serde(default)]
    pub amplitude: Vec<f64>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub noise: Vec<f64>,
}

impl SweepSection {
    pub fn is_empty(&self) -> bool {
        self.damping.is_empty()
            && self.dt.is_empty()
            && self.amplitude.is_empty()
            && self.eps.is_empty()
            && self.noise.is_empty()
    }
}

/// A fully validated scenario; serialized back out as the config echo so every
/// default the run used is on record.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub initial: InitialData,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Seed for any randomized perturbation; recorded even when unused.
    #[serde(default)]
    pub seed: u64,
    /// Amplitude of seeded low-frequency noise added to u0 (0 = none).
    #[serde(default)]
    pub noise: f64,
    #[serde(default, skip_serializing_if = "SweepSection::is_empty")]
    pub sweep: SweepSection,
}

impl ScenarioSpec {
    pub fn diagnostics_config(&self) -> DiagnosticsConfig {
        DiagnosticsConfig {
            mu: self.diagnostics.mu,
            detection_cutoff: self.diagnostics.detection_cutoff,
        }
    }

    /// Critical exponent bound; finite only for d = 3 at desk scale.
    fn lambda(d: usize) -> f64 {
        if d >= 3 {
            1.0 + 4.0 / (d as f64 - 2.0)
        } else {
            f64::INFINITY
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.model.dimension;
        let p = self.model.exponent;
        if !(1..=3).contains(&d) {
            bail!("model.dimension: must be 1, 2 or 3, got {d}");
        }
        let lambda = Self::lambda(d);
        if !(p > 1.0) || p >= lambda {
            bail!(
                "model.exponent: p = {p} not admissible for d = {d} \
                 (requires 1 < p < lambda({d}) = {lambda})"
            );
        }
        if !(self.model.damping >= 0.0) {
            bail!("model.damping: must be nonnegative, got {}", self.model.damping);
        }
        if !(self.grid.half_length > 0.0) {
            bail!("grid.half_length: must be positive, got {}", self.grid.half_length);
        }
        let n = self.grid.points;
        if n < 16 || !n.is_power_of_two() {
            bail!("grid.points: must be a power of two >= 16, got {n}");
        }
        let k_max = std::f64::consts::PI * (n as f64 / 2.0) / self.grid.half_length;
        let factor = (1.0 + k_max * k_max).sqrt();
        let bound = self.time.dt * factor;
        if !(self.time.dt > 0.0) {
            bail!("time.dt: must be positive, got {}", self.time.dt);
        }
        if bound > 0.5 {
            bail!(
                "time.dt: dt*sqrt(1+k_max^2) = {bound:.4} exceeds 0.5 \
                 (max stable dt for this grid is {:.3e})",
                0.5 / factor
            );
        }
        if !(self.time.final_time >= 0.0) {
            bail!("time.final_time: must be nonnegative, got {}", self.time.final_time);
        }
        if self.time.stride == 0 {
            bail!("time.stride: must be positive");
        }
        self.diagnostics_config()
            .validate()
            .map_err(|e| anyhow::anyhow!("diagnostics.mu: {e}"))?;
        if self.noise < 0.0 {
            bail!("noise: must be nonnegative, got {}", self.noise);
        }
        Ok(())
    }
}

/// Environment overrides: `KGR_` + upper-cased key name, scalars only.
fn apply_env_overrides(spec: &mut ScenarioSpec) -> Result<()> {
    fn get(key: &str) -> Option<String> {
        std::env::var(format!("KGR_{key}")).ok()
    }
    fn parse<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        raw.parse()
            .map_err(|e| anyhow::anyhow!("env KGR_{key} = {raw:?}: {e}"))
    }
    if let Some(v) = get("NAME") {
        spec.name = v;
    }
    if let Some(v) = get("DIMENSION") {
        spec.model.dimension = parse("DIMENSION", &v)?;
    }
    if let Some(v) = get("EXPONENT") {
        spec.model.exponent = parse("EXPONENT", &v)?;
    }
    if let Some(v) = get("DAMPING") {
        spec.model.damping = parse("DAMPING", &v)?;
    }
    if let Some(v) = get("HALF_LENGTH") {
        spec.grid.half_length = parse("HALF_LENGTH", &v)?;
    }
    if let Some(v) = get("POINTS") {
        spec.grid.points = parse("POINTS", &v)?;
    }
    if let Some(v) = get("DT") {
        spec.time.dt = parse("DT", &v)?;
    }
    if let Some(v) = get("FINAL_TIME") {
        spec.time.final_time = parse("FINAL_TIME", &v)?;
    }
    if let Some(v) = get("STRIDE") {
        spec.time.stride = parse("STRIDE", &v)?;
    }
    if let Some(v) = get("SEED") {
        spec.seed = parse("SEED", &v)?;
    }
    if let Some(v) = get("NOISE") {
        spec.noise = parse("NOISE", &v)?;
    }
    if let Some(v) = get("DIR") {
        spec.output.dir = PathBuf::from(v);
    }
    Ok(())
}

/// Parse, apply env overrides and CLI-level overrides, validate.
pub fn load(
    path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut spec: ScenarioSpec =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    apply_env_overrides(&mut spec)?;
    if let Some(out) = out {
        spec.output.dir = out.to_path_buf();
    }
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}
