//! Littlewood-Paley projectors.
//!
//! The default multipliers are raised-cosine in `log2 |k|` with a one-octave
//! transition centered at the cutoff, so `low(N) + high(N) = 1` at every mode
//! by construction. Sharp (indicator) cutoffs are available for oracle tests.

use crate::error::{KgError, Result};
use crate::grid::SpectralGrid;
use crate::spectral;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandKind {
    /// Pass `|k|` below the cutoff.
    Low,
    /// Pass `|k|` above the cutoff.
    High,
    /// Dyadic band around the cutoff: `low(2N) - low(N)`.
    Dyadic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub cutoff: f64,
    pub kind: BandKind,
    /// Use indicator cutoffs instead of the smooth raised cosine.
    pub sharp: bool,
}

impl ProjectorSpec {
    pub fn low(cutoff: f64) -> Self {
        ProjectorSpec { cutoff, kind: BandKind::Low, sharp: false }
    }

    pub fn high(cutoff: f64) -> Self {
        ProjectorSpec { cutoff, kind: BandKind::High, sharp: false }
    }

    pub fn dyadic(cutoff: f64) -> Self {
        ProjectorSpec { cutoff, kind: BandKind::Dyadic, sharp: false }
    }

    pub fn sharp(mut self) -> Self {
        self.sharp = true;
        self
    }

    fn low_transfer(&self, k_abs: f64) -> f64 {
        if self.sharp {
            return if k_abs <= self.cutoff { 1.0 } else { 0.0 };
        }
        if k_abs == 0.0 {
            return 1.0;
        }
        // transition spans one octave in log2|k|, centered at the cutoff
        let t = (k_abs / self.cutoff).log2();
        let s = (t + 0.5).clamp(0.0, 1.0);
        let c = (std::f64::consts::FRAC_PI_2 * s).cos();
        c * c
    }

    /// Multiplier value at wavenumber magnitude `|k|`; always in `[0, 1]`.
    pub fn transfer(&self, k_abs: f64) -> f64 {
        match self.kind {
            BandKind::Low => self.low_transfer(k_abs),
            BandKind::High => 1.0 - self.low_transfer(k_abs),
            BandKind::Dyadic => {
                let wider = ProjectorSpec { cutoff: 2.0 * self.cutoff, ..*self };
                wider.low_transfer(k_abs) - self.low_transfer(k_abs)
            }
        }
    }

    fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        if !(self.cutoff > 0.0) {
            return Err(KgError::usage(format!(
                "projector cutoff must be positive, got {}",
                self.cutoff
            )));
        }
        let nyq = grid.nyquist();
        if self.cutoff > nyq {
            return Err(KgError::usage(format!(
                "projector cutoff {} exceeds grid Nyquist wavenumber {nyq}",
                self.cutoff
            )));
        }
        Ok(())
    }
}

/// Apply the projector multiplier to a spectrum in place.
pub fn apply_to_spectrum(
    grid: &SpectralGrid,
    spectrum: &mut [Complex64],
    spec: &ProjectorSpec,
) -> Result<()> {
    spec.validate(grid)?;
    let k2 = grid.k_squared();
    for (c, &kk) in spectrum.iter_mut().zip(k2.iter()) {
        *c *= spec.transfer(kk.sqrt());
    }
    Ok(())
}

/// Filter a real field through the projector.
pub fn apply(grid: &SpectralGrid, field: &[f64], spec: &ProjectorSpec) -> Result<Vec<f64>> {
    let mut spectrum = spectral::forward(grid, field)?;
    apply_to_spectrum(grid, &mut spectrum, spec)?;
    spectral::inverse(grid, &spectrum)
}
