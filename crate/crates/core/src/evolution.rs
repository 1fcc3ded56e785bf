//! Time integration of `u_tt - Lap u + u + 2 alpha u_t = |u|^{p-1} u`.
//!
//! The linear part is advanced exactly per Fourier mode with the damped
//! propagators (frequency `omega = sqrt(1 + |k|^2 - alpha^2)`, hyperbolic
//! branch when `alpha^2 > 1 + |k|^2`); the nonlinearity enters through a
//! Strang split: half linear step, full nonlinear kick, half linear step.

use crate::error::{KgError, Result};
use crate::field::{self, FieldState, NormReport};
use crate::grid::SpectralGrid;
use crate::spectral;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub final_time: f64,
    /// Sup-norm threshold that flags blowup (NaN always flags).
    pub blowup_threshold: f64,
    /// Steps between trajectory samples.
    pub callback_stride: usize,
    pub dealias: bool,
    /// Disable the nonlinear kick entirely (linear-flow oracle runs).
    pub linear_only: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-3,
            final_time: 10.0,
            blowup_threshold: 1e6,
            callback_stride: 100,
            dealias: true,
            linear_only: false,
        }
    }
}

impl EvolutionConfig {
    fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        if !(self.dt > 0.0) || !(self.final_time >= 0.0) || !(self.blowup_threshold > 0.0) {
            return Err(KgError::usage(format!(
                "need dt > 0, T >= 0, threshold > 0 (got {}, {}, {})",
                self.dt, self.final_time, self.blowup_threshold
            )));
        }
        let kmax = grid.nyquist();
        let bound = self.dt * (1.0 + kmax * kmax).sqrt();
        if bound > 0.5 {
            return Err(KgError::usage(format!(
                "dt = {} violates the stability bound dt*sqrt(1+k_max^2) = {bound:.3} <= 0.5",
                self.dt
            )));
        }
        Ok(())
    }
}

/// One diagnostic sample along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySample {
    pub time: f64,
    pub norms: NormReport,
    pub energy: f64,
    /// Cumulative `2 alpha int_0^t |u_t|_2^2 ds`, per-step trapezoid.
    pub dissipation: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlowupReport {
    pub time: f64,
    /// Sup-norm (or NaN) that triggered the flag.
    pub trigger_value: f64,
}

#[derive(Debug)]
pub struct EvolveOutcome {
    pub final_state: FieldState,
    pub samples: Vec<TrajectorySample>,
    pub blowup: Option<BlowupReport>,
}

/// Per-mode 2x2 update matrix `(u, u_t) -> (a u + b u_t, c u + d u_t)` for
/// the exact damped linear flow over a fixed interval.
struct Propagator {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl Propagator {
    fn new(grid: &SpectralGrid, alpha: f64, dt: f64) -> Self {
        let k2 = grid.k_squared();
        let m = k2.len();
        let mut p = Propagator {
            a: vec![0.0; m],
            b: vec![0.0; m],
            c: vec![0.0; m],
            d: vec![0.0; m],
        };
        for (i, &kk) in k2.iter().enumerate() {
            let lin = 1.0 + kk; // -Lap + 1 symbol
            let omega_sq = lin - alpha * alpha;
            let (cosine, sinc) = if omega_sq > 1e-12 {
                let omega = omega_sq.sqrt();
                let decay = (-alpha * dt).exp();
                (decay * (omega * dt).cos(), decay * (omega * dt).sin() / omega)
            } else if omega_sq < -1e-12 {
                // overdamped branch: factor the decay into the exponentials so
                // every term stays bounded by e^{(nu - alpha) dt} <= 1
                let nu = (-omega_sq).sqrt();
                let ep = ((nu - alpha) * dt).exp();
                let em = (-(nu + alpha) * dt).exp();
                (0.5 * (ep + em), 0.5 * (ep - em) / nu)
            } else {
                let decay = (-alpha * dt).exp();
                (decay, decay * dt)
            };
            p.a[i] = cosine + alpha * sinc;
            p.b[i] = sinc;
            p.c[i] = -lin * sinc;
            p.d[i] = cosine - alpha * sinc;
        }
        p
    }

    fn apply(&self, u: &mut [Complex64], ut: &mut [Complex64]) {
        for i in 0..self.a.len() {
            let (x, y) = (u[i], ut[i]);
            u[i] = self.a[i] * x + self.b[i] * y;
            ut[i] = self.c[i] * x + self.d[i] * y;
        }
    }
}

/// Advance the *linear* damped Klein-Gordon flow exactly by `dt` (may be
/// negative; exact inverse of the forward flow when the oscillatory branch
/// applies everywhere).
pub fn linear_flow(state: &FieldState, dt: f64) -> Result<FieldState> {
    let grid = &state.grid;
    let prop = Propagator::new(grid, state.damping, dt);
    let mut u = spectral::forward(grid, &state.u)?;
    let mut ut = spectral::forward(grid, &state.ut)?;
    prop.apply(&mut u, &mut ut);
    let mut out = state.clone();
    out.u = spectral::inverse(grid, &u)?;
    out.ut = spectral::inverse(grid, &ut)?;
    out.time = state.time + dt;
    Ok(out)
}

/// Strang-split stepper holding the state in spectral space between steps.
pub struct Evolver {
    grid: Arc<SpectralGrid>,
    exponent: f64,
    damping: f64,
    config: EvolutionConfig,
    half: Propagator,
    keep: Vec<bool>,
    u_hat: Vec<Complex64>,
    ut_hat: Vec<Complex64>,
    time: f64,
    /// `h^d / n^d`, the Parseval factor turning mode sums into quadrature.
    parseval: f64,
}

impl Evolver {
    pub fn new(state: &FieldState, config: EvolutionConfig) -> Result<Self> {
        config.validate(&state.grid)?;
        if !state.is_finite() {
            return Err(KgError::NonFinite("initial state must be finite".into()));
        }
        let grid = state.grid.clone();
        let half = Propagator::new(&grid, state.damping, config.dt / 2.0);
        let keep = grid.dealias_mask();
        let u_hat = spectral::forward(&grid, &state.u)?;
        let ut_hat = spectral::forward(&grid, &state.ut)?;
        let parseval = grid.cell_volume() / grid.len() as f64;
        Ok(Evolver {
            grid,
            exponent: state.exponent,
            damping: state.damping,
            config,
            half,
            keep,
            u_hat,
            ut_hat,
            time: state.time,
            parseval,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `|u_t|_2^2` straight from the spectral representation.
    pub fn ut_l2_squared(&self) -> f64 {
        self.parseval * self.ut_hat.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Materialize the physical state at the current time.
    pub fn snapshot(&self) -> Result<FieldState> {
        let u = spectral::inverse(&self.grid, &self.u_hat)?;
        let ut = spectral::inverse(&self.grid, &self.ut_hat)?;
        let mut s = FieldState::new(self.grid.clone(), u, ut, self.exponent, self.damping)?;
        s.time = self.time;
        Ok(s)
    }

    /// One Strang step; returns a blowup report if the sup-norm escaped.
    pub fn step(&mut self) -> Result<Option<BlowupReport>> {
        let dt = self.config.dt;
        self.half.apply(&mut self.u_hat, &mut self.ut_hat);
        if !self.config.linear_only {
            // dealias, evaluate |u|^{p-1}u pointwise, dealias again
            let mut masked = self.u_hat.clone();
            if self.config.dealias {
                for (c, &keep) in masked.iter_mut().zip(self.keep.iter()) {
                    if !keep {
                        *c = Complex64::default();
                    }
                }
            }
            let u = spectral::inverse(&self.grid, &masked)?;
            let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !sup.is_finite() || sup > self.config.blowup_threshold {
                return Ok(Some(BlowupReport { time: self.time, trigger_value: sup }));
            }
            let kick: Vec<f64> = u.iter().map(|&v| field::signed_power(v, self.exponent)).collect();
            let mut kick_hat = spectral::forward(&self.grid, &kick)?;
            if self.config.dealias {
                for (c, &keep) in kick_hat.iter_mut().zip(self.keep.iter()) {
                    if !keep {
                        *c = Complex64::default();
                    }
                }
            }
            for (a, b) in self.ut_hat.iter_mut().zip(kick_hat.iter()) {
                *a += dt * b;
            }
        }
        self.half.apply(&mut self.u_hat, &mut self.ut_hat);
        self.time += dt;
        if self.u_hat.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Ok(Some(BlowupReport { time: self.time, trigger_value: f64::NAN }));
        }
        Ok(None)
    }

    /// Round-trip through physical space to apply the tracker projection.
    fn filter(&mut self, tracker: &EquilibriumTracker) -> Result<()> {
        let mut u = spectral::inverse(&self.grid, &self.u_hat)?;
        let mut ut = spectral::inverse(&self.grid, &self.ut_hat)?;
        tracker.apply(&mut u, &mut ut);
        self.u_hat = spectral::forward(&self.grid, &u)?;
        self.ut_hat = spectral::forward(&self.grid, &ut)?;
        Ok(())
    }
}

/// One public Strang step of the full equation.
pub fn step(state: &FieldState, config: &EvolutionConfig) -> Result<FieldState> {
    let mut ev = Evolver::new(state, config.clone())?;
    if let Some(report) = ev.step()? {
        return Err(KgError::Usage(format!(
            "state blew up during the step at t = {} (|u|_inf = {})",
            report.time, report.trigger_value
        )));
    }
    ev.snapshot()
}

/// Removes the unstable eigencomponents of the deviation from a target sum
/// of equilibria.
///
/// Every equilibrium of the focusing equation is exponentially unstable: the
/// linearization `L = -Lap + 1 - p|Q|^{p-1}` has a negative ground eigenvalue
/// `e0` (exactly -3 for the cubic 1d state), so the flow grows deviations
/// like `e^{(-alpha + sqrt(alpha^2 - e0)) t}` and truncation error destroys a
/// numerically embedded equilibrium after a few e-folding times. Trajectories
/// that genuinely converge to equilibria live on the local stable manifold;
/// tracking them is done the standard way, by periodically projecting the
/// deviation `(u - sum Q_j, u_t)` off the span of the unstable eigenpairs
/// `(phi_j, lambda_plus phi_j)`.
pub struct EquilibriumTracker {
    reference: Vec<f64>,
    modes: Vec<Vec<f64>>,
    lambda_plus: Vec<f64>,
    lambda_minus: Vec<f64>,
    weight: f64,
    /// Steps between filter applications.
    pub every: usize,
}

impl EquilibriumTracker {
    /// Build a tracker for equilibria placed at `centers` (profiles embedded
    /// independently; overlap between well-separated components is
    /// exponentially small and ignored).
    pub fn new(
        grid: &Arc<SpectralGrid>,
        damping: f64,
        components: &[(&crate::equilibria::EquilibriumProfile, &[f64])],
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(KgError::usage("tracker needs at least one equilibrium"));
        }
        let mut reference = vec![0.0; grid.len()];
        let mut modes = Vec::new();
        let mut lambda_plus = Vec::new();
        let mut lambda_minus = Vec::new();
        for (profile, center) in components {
            let (q, _) = crate::equilibria::embed_on_grid(profile, grid, center)?;
            let (e0, phi) =
                crate::equilibria::linearization_ground_mode(grid, profile.exponent, &q)?;
            if e0 >= 0.0 {
                return Err(KgError::usage(format!(
                    "linearization ground eigenvalue {e0} is not negative; nothing to track"
                )));
            }
            let root = (damping * damping - e0).sqrt();
            lambda_plus.push(-damping + root);
            lambda_minus.push(-damping - root);
            for (r, v) in reference.iter_mut().zip(q) {
                *r += v;
            }
            modes.push(phi);
        }
        Ok(EquilibriumTracker {
            reference,
            modes,
            lambda_plus,
            lambda_minus,
            weight: grid.cell_volume(),
            every: 100,
        })
    }

    /// Project `(u - reference, ut)` off each unstable eigenpair in place.
    pub fn apply(&self, u: &mut [f64], ut: &mut [f64]) {
        for (j, phi) in self.modes.iter().enumerate() {
            let (lp, lm) = (self.lambda_plus[j], self.lambda_minus[j]);
            let mut a = 0.0;
            let mut b = 0.0;
            for i in 0..u.len() {
                a += (u[i] - self.reference[i]) * phi[i];
                b += ut[i] * phi[i];
            }
            a *= self.weight;
            b *= self.weight;
            // deviation restricted to span{phi} solves y'' + 2 alpha y' + e0 y
            // = 0; (a, b) = c+ (1, l+) + c- (1, l-), remove the growing branch
            let c = (b - lm * a) / (lp - lm);
            for i in 0..u.len() {
                u[i] -= c * phi[i];
                ut[i] -= c * lp * phi[i];
            }
        }
    }
}

/// Advance to `final_time` or blowup, sampling every `callback_stride` steps.
///
/// The observer sees every emitted sample together with the state snapshot it
/// was computed from. Blowup is a reported outcome, not an error.
pub fn evolve(
    initial: &FieldState,
    config: &EvolutionConfig,
    observer: impl FnMut(&TrajectorySample, &FieldState),
) -> Result<EvolveOutcome> {
    evolve_impl(initial, config, None, observer)
}

/// `evolve` with an [`EquilibriumTracker`] applied every `tracker.every`
/// steps. Use for trajectories on the stable manifold of unstable equilibria
/// (stationary and multi-soliton scenarios), which plain stepping cannot
/// follow past a few e-folding times of the instability.
pub fn evolve_tracked(
    initial: &FieldState,
    config: &EvolutionConfig,
    tracker: &EquilibriumTracker,
    observer: impl FnMut(&TrajectorySample, &FieldState),
) -> Result<EvolveOutcome> {
    if tracker.every == 0 {
        return Err(KgError::usage("tracker.every must be positive"));
    }
    evolve_impl(initial, config, Some(tracker), observer)
}

fn evolve_impl(
    initial: &FieldState,
    config: &EvolutionConfig,
    tracker: Option<&EquilibriumTracker>,
    mut observer: impl FnMut(&TrajectorySample, &FieldState),
) -> Result<EvolveOutcome> {
    let mut ev = Evolver::new(initial, config.clone())?;
    let total_steps = (config.final_time / config.dt).round() as usize;
    let twice_alpha = 2.0 * ev.damping;
    let mut dissipation = 0.0;
    let mut prev_ut2 = ev.ut_l2_squared();
    let mut samples = Vec::new();

    let mut emit = |ev: &Evolver, dissipation: f64, samples: &mut Vec<TrajectorySample>| -> Result<()> {
        let state = ev.snapshot()?;
        let sample = TrajectorySample {
            time: ev.time(),
            norms: field::norms(&state)?,
            energy: field::energy(&state)?,
            dissipation,
        };
        observer(&sample, &state);
        samples.push(sample);
        Ok(())
    };

    emit(&ev, dissipation, &mut samples)?;
    let mut blowup = None;
    for step_index in 1..=total_steps {
        if let Some(report) = ev.step()? {
            blowup = Some(report);
            break;
        }
        let ut2 = ev.ut_l2_squared();
        dissipation += twice_alpha * 0.5 * (prev_ut2 + ut2) * config.dt;
        prev_ut2 = ut2;
        if let Some(tracker) = tracker {
            if step_index % tracker.every == 0 {
                ev.filter(tracker)?;
                // the filter nudged ut; restart the trapezoid from the new value
                prev_ut2 = ev.ut_l2_squared();
            }
        }
        if step_index % config.callback_stride == 0 || step_index == total_steps {
            emit(&ev, dissipation, &mut samples)?;
        }
    }
    let final_state = match blowup {
        // the spectral state may already be non-finite; report what we have
        Some(_) => initial.clone(),
        None => ev.snapshot()?,
    };
    Ok(EvolveOutcome { final_state, samples, blowup })
}

/// Maximum relative defect of `E(t2) - E(t1) + 2 alpha int |u_t|^2` over all
/// sample pairs of a non-blowup run.
pub fn dissipation_identity_check(outcome: &EvolveOutcome) -> Result<f64> {
    if outcome.blowup.is_some() {
        return Err(KgError::usage("dissipation identity is undefined for a blown-up run"));
    }
    if outcome.samples.len() < 2 {
        return Err(KgError::usage("need at least two samples"));
    }
    let s = &outcome.samples;
    let mut worst = 0.0f64;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let defect = (s[j].energy - s[i].energy + (s[j].dissipation - s[i].dissipation)).abs();
            worst = worst.max(defect / s[i].energy.abs().max(1.0));
        }
    }
    Ok(worst)
}
