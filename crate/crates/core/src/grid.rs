//! Periodic computational box `[-L, L)^d` with uniform sampling.
//!
//! The box approximates `R^d`; the damping suppresses radiation before it can
//! wrap around, provided `L` is chosen large enough (the harness warns when
//! the boundary-cell energy density exceeds 1e-10 of the total).

use crate::error::{KgError, Result};
use serde::{Deserialize, Serialize};

/// Geometry of the periodic grid: dimension, points per axis, half-length.
///
/// Wavenumbers along each axis are `k = pi * m / L` for mode indices
/// `m in [-n/2, n/2)`, stored in standard FFT order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    dimension: usize,
    points_per_axis: usize,
    half_length: f64,
    dealias_fraction: f64,
}

impl SpectralGrid {
    pub fn new(dimension: usize, points_per_axis: usize, half_length: f64) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(KgError::usage(format!(
                "dimension must be 1, 2 or 3, got {dimension}"
            )));
        }
        if points_per_axis < 16 || !points_per_axis.is_power_of_two() {
            return Err(KgError::usage(format!(
                "points per axis must be a power of two >= 16, got {points_per_axis}"
            )));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(KgError::usage(format!(
                "box half-length must be positive and finite, got {half_length}"
            )));
        }
        Ok(SpectralGrid {
            dimension,
            points_per_axis,
            half_length,
            dealias_fraction: 2.0 / 3.0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Total number of grid points `n^d`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `h = 2L/n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points_per_axis as f64
    }

    /// Quadrature weight per cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    /// Largest resolved wavenumber, `pi (n/2) / L`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * (self.points_per_axis as f64 / 2.0) / self.half_length
    }

    /// Signed mode index for FFT bin `j`: `j` for `j < n/2`, else `j - n`.
    pub fn mode_index(&self, bin: usize) -> i64 {
        let n = self.points_per_axis as i64;
        let j = bin as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Wavenumbers along one axis in FFT bin order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        let scale = std::f64::consts::PI / self.half_length;
        (0..self.points_per_axis)
            .map(|j| scale * self.mode_index(j) as f64)
            .collect()
    }

    /// Physical coordinates along one axis: `x_i = -L + i h`.
    pub fn axis_coords(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points_per_axis)
            .map(|i| -self.half_length + i as f64 * h)
            .collect()
    }

    /// Decompose a flat row-major index into per-axis indices.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let n = self.points_per_axis;
        let mut idx = [0usize; 3];
        for a in (0..self.dimension).rev() {
            idx[a] = flat % n;
            flat /= n;
        }
        idx
    }

    /// Flat index of per-axis indices (only the first `d` entries are read).
    pub fn ravel(&self, idx: &[usize]) -> usize {
        let n = self.points_per_axis;
        let mut flat = 0usize;
        for a in 0..self.dimension {
            flat = flat * n + idx[a] % n;
        }
        flat
    }

    /// Physical coordinates of the grid point at `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        let idx = self.unravel(flat);
        (0..self.dimension)
            .map(|a| -self.half_length + idx[a] as f64 * h)
            .collect()
    }

    /// `|k|^2` for every flat spectral index, FFT order.
    pub fn k_squared(&self) -> Vec<f64> {
        let axis = self.axis_wavenumbers();
        let mut out = vec![0.0; self.len()];
        for (flat, v) in out.iter_mut().enumerate() {
            let idx = self.unravel(flat);
            let mut s = 0.0;
            for a in 0..self.dimension {
                s += axis[idx[a]] * axis[idx[a]];
            }
            *v = s;
        }
        out
    }

    /// Wrap a per-axis displacement into `[-L, L)`.
    pub fn wrap_displacement(&self, delta: f64) -> f64 {
        let period = 2.0 * self.half_length;
        let mut r = delta.rem_euclid(period);
        if r >= self.half_length {
            r -= period;
        }
        r
    }

    /// Shortest periodic distance between two points.
    pub fn periodic_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for ax in 0..self.dimension {
            let d = self.wrap_displacement(a[ax] - b[ax]);
            s += d * d;
        }
        s.sqrt()
    }

    /// Dealiasing keep-mask (2/3 rule) over flat spectral indices.
    ///
    /// A mode is kept iff `|m| <= dealias_fraction * n/2` on every axis; the
    /// unpaired Nyquist bin `m = -n/2` is always dropped.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let n = self.points_per_axis as f64;
        let keep_max = (self.dealias_fraction * n / 2.0).floor() as i64;
        let mut out = vec![true; self.len()];
        for (flat, keep) in out.iter_mut().enumerate() {
            let idx = self.unravel(flat);
            for a in 0..self.dimension {
                if self.mode_index(idx[a]).abs() > keep_max {
                    *keep = false;
                    break;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_geometry() {
        assert!(SpectralGrid::new(0, 64, 10.0).is_err());
        assert!(SpectralGrid::new(1, 48, 10.0).is_err());
        assert!(SpectralGrid::new(1, 8, 10.0).is_err());
        assert!(SpectralGrid::new(1, 64, -1.0).is_err());
        assert!(SpectralGrid::new(4, 64, 10.0).is_err());
    }

    #[test]
    fn wavenumbers_symmetric_except_nyquist() {
        let g = SpectralGrid::new(1, 32, 5.0).unwrap();
        let k = g.axis_wavenumbers();
        assert_eq!(k[0], 0.0);
        for j in 1..16 {
            assert_eq!(k[j], -k[32 - j]);
        }
        // unpaired Nyquist mode
        assert!(k[16] < 0.0);
        assert!((k[16].abs() - g.nyquist()).abs() < 1e-14);
    }

    #[test]
    fn ravel_unravel_roundtrip() {
        let g = SpectralGrid::new(3, 16, 1.0).unwrap();
        for flat in [0usize, 1, 17, 4095, 16 * 16 * 16 - 1] {
            let idx = g.unravel(flat);
            assert_eq!(g.ravel(&idx), flat);
        }
    }

    #[test]
    fn periodic_distance_wraps() {
        let g = SpectralGrid::new(1, 64, 10.0).unwrap();
        assert!((g.periodic_distance(&[9.0], &[-9.0]) - 2.0).abs() < 1e-14);
        assert!((g.periodic_distance(&[0.0], &[3.0]) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn dealias_drops_nyquist_and_high_modes() {
        let g = SpectralGrid::new(1, 32, 1.0).unwrap();
        let mask = g.dealias_mask();
        assert!(mask[0]);
        assert!(mask[10]); // |m| = 10 <= 10
        assert!(!mask[11]); // |m| = 11 > floor(2/3 * 16) = 10
        assert!(!mask[16]); // Nyquist
        assert!(mask[32 - 10]);
    }
}
