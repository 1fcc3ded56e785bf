//! The dynamical state `(u, u_t)` and its norms and energy.
//!
//! Phase space is `H = H^1 x L^2`; all integrals use the rectangle rule with
//! cell weight `h^d`, which is exact for band-limited integrands.

use crate::error::{KgError, Result};
use crate::grid::SpectralGrid;
use crate::spectral;
use serde::Serialize;
use std::sync::Arc;

/// Admissible nonlinearity exponents: `1 < p` for d = 1, 2 and
/// `1 < p < 1 + 4/(d-2)` for d = 3.
pub fn check_admissible(dimension: usize, exponent: f64) -> Result<()> {
    if !(exponent > 1.0) {
        return Err(KgError::usage(format!("exponent p must exceed 1, got {exponent}")));
    }
    if dimension == 3 && exponent >= 5.0 {
        return Err(KgError::usage(format!(
            "exponent p = {exponent} not admissible for d = 3 (requires p < 5)"
        )));
    }
    Ok(())
}

/// The pair `(u, du/dt)` on a periodic grid together with equation parameters.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub grid: Arc<SpectralGrid>,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub time: f64,
    pub exponent: f64,
    pub damping: f64,
}

impl FieldState {
    pub fn new(
        grid: Arc<SpectralGrid>,
        u: Vec<f64>,
        ut: Vec<f64>,
        exponent: f64,
        damping: f64,
    ) -> Result<Self> {
        if u.len() != grid.len() || ut.len() != grid.len() {
            return Err(KgError::usage(format!(
                "field shapes ({}, {}) do not match grid size {}",
                u.len(),
                ut.len(),
                grid.len()
            )));
        }
        check_admissible(grid.dimension(), exponent)?;
        if !(damping >= 0.0) {
            return Err(KgError::usage(format!("damping must be >= 0, got {damping}")));
        }
        Ok(FieldState { grid, u, ut, time: 0.0, exponent, damping })
    }

    pub fn zero(grid: Arc<SpectralGrid>, exponent: f64, damping: f64) -> Result<Self> {
        let n = grid.len();
        FieldState::new(grid, vec![0.0; n], vec![0.0; n], exponent, damping)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|v| v.is_finite()) && self.ut.iter().all(|v| v.is_finite())
    }

    fn require_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(KgError::NonFinite(format!(
                "state at t = {} contains NaN/Inf (blown up?)",
                self.time
            )))
        }
    }
}

/// Quadrature norms of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_ut: f64,
    pub linf_u: f64,
    /// `(h1_u^2 + l2_ut^2)^{1/2}`, the H = H^1 x L^2 norm.
    pub h_norm: f64,
}

fn quad_l2(grid: &SpectralGrid, f: &[f64]) -> f64 {
    (grid.cell_volume() * f.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// All norms of the state (rectangle-rule quadrature, gradient by spectral
/// differentiation).
pub fn norms(state: &FieldState) -> Result<NormReport> {
    state.require_finite()?;
    let grid = &state.grid;
    let l2_u = quad_l2(grid, &state.u);
    let l2_ut = quad_l2(grid, &state.ut);
    let linf_u = state.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let grad = spectral::gradient(grid, &state.u)?;
    let grad_sq: f64 = grad
        .iter()
        .map(|g| grid.cell_volume() * g.iter().map(|v| v * v).sum::<f64>())
        .sum();
    let h1_u = (l2_u * l2_u + grad_sq).sqrt();
    let h_norm = (h1_u * h1_u + l2_ut * l2_ut).sqrt();
    Ok(NormReport { l2_u, h1_u, l2_ut, linf_u, h_norm })
}

/// The conserved-up-to-dissipation energy
/// `E = int ( |grad u|^2/2 + u^2/2 + u_t^2/2 - |u|^{p+1}/(p+1) )`.
pub fn energy(state: &FieldState) -> Result<f64> {
    state.require_finite()?;
    let grid = &state.grid;
    let grad = spectral::gradient(grid, &state.u)?;
    let p1 = state.exponent + 1.0;
    let mut total = 0.0;
    for i in 0..grid.len() {
        let mut g2 = 0.0;
        for g in &grad {
            g2 += g[i] * g[i];
        }
        let u = state.u[i];
        let ut = state.ut[i];
        total += 0.5 * g2 + 0.5 * u * u + 0.5 * ut * ut - u.abs().powf(p1) / p1;
    }
    Ok(total * grid.cell_volume())
}

/// Pointwise energy density `e = |grad u|^2 + u^2 + u_t^2`; its quadrature is
/// the squared H-norm.
pub fn local_energy_density(state: &FieldState) -> Result<Vec<f64>> {
    state.require_finite()?;
    let grad = spectral::gradient(&state.grid, &state.u)?;
    let mut out = vec![0.0; state.grid.len()];
    for (i, e) in out.iter_mut().enumerate() {
        let mut g2 = 0.0;
        for g in &grad {
            g2 += g[i] * g[i];
        }
        *e = g2 + state.u[i] * state.u[i] + state.ut[i] * state.ut[i];
    }
    Ok(out)
}

/// Pointwise minimum periodic distance to a set of centers.
pub fn distance_field(grid: &SpectralGrid, centers: &[Vec<f64>]) -> Result<Vec<f64>> {
    if centers.is_empty() {
        return Err(KgError::usage("distance field requires at least one center"));
    }
    let mut out = vec![f64::INFINITY; grid.len()];
    for (flat, v) in out.iter_mut().enumerate() {
        let x = grid.point(flat);
        for c in centers {
            let d = grid.periodic_distance(&x, c);
            if d < *v {
                *v = d;
            }
        }
    }
    Ok(out)
}

/// Odd signed power `|u|^{p-1} u = sign(u) |u|^p`.
pub fn signed_power(u: f64, exponent: f64) -> f64 {
    u.signum() * u.abs().powf(exponent)
}
