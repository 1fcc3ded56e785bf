//! Fourier transforms and spectral-space operators on the periodic grid.
//!
//! Real fields are transformed with a full complex FFT per axis; the forward
//! transform is unnormalized and the inverse divides by `n^d`, so
//! `inverse(forward(f)) == f` to machine precision.

use crate::error::{KgError, Result};
use crate::grid::SpectralGrid;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = PLANNER.lock().unwrap();
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

/// In-place complex FFT along every axis of a row-major `[n; d]` array.
fn fft_all_axes(grid: &SpectralGrid, data: &mut [Complex64], forward: bool) {
    let n = grid.points_per_axis();
    let d = grid.dimension();
    let fft = plan(n, forward);
    let mut line = vec![Complex64::default(); n];
    for axis in 0..d {
        let inner: usize = n.pow((d - 1 - axis) as u32);
        let outer: usize = n.pow(axis as u32);
        if inner == 1 {
            for chunk in data.chunks_exact_mut(n) {
                fft.process(chunk);
            }
        } else {
            for o in 0..outer {
                let base_o = o * n * inner;
                for i in 0..inner {
                    let base = base_o + i;
                    for j in 0..n {
                        line[j] = data[base + j * inner];
                    }
                    fft.process(&mut line);
                    for j in 0..n {
                        data[base + j * inner] = line[j];
                    }
                }
            }
        }
    }
}

fn check_shape(grid: &SpectralGrid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(KgError::usage(format!(
            "field length {} does not match grid size {}",
            len,
            grid.len()
        )));
    }
    Ok(())
}

/// Forward transform of a real field to complex mode coefficients (FFT order).
pub fn forward(grid: &SpectralGrid, field: &[f64]) -> Result<Vec<Complex64>> {
    check_shape(grid, field.len())?;
    let mut data: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_all_axes(grid, &mut data, true);
    Ok(data)
}

/// Inverse transform back to a real field (imaginary residue is discarded).
pub fn inverse(grid: &SpectralGrid, spectrum: &[Complex64]) -> Result<Vec<f64>> {
    check_shape(grid, spectrum.len())?;
    let mut data = spectrum.to_vec();
    fft_all_axes(grid, &mut data, false);
    let scale = 1.0 / grid.len() as f64;
    Ok(data.iter().map(|c| c.re * scale).collect())
}

/// Spectral derivative along `axis`: multiply modes by `i k`, Nyquist zeroed.
pub fn derivative_spectrum(grid: &SpectralGrid, spectrum: &mut [Complex64], axis: usize) {
    let k = grid.axis_wavenumbers();
    let n = grid.points_per_axis();
    let half = n / 2;
    for (flat, c) in spectrum.iter_mut().enumerate() {
        let idx = grid.unravel(flat);
        let j = idx[axis];
        if j == half {
            // unpaired Nyquist mode has no well-defined odd derivative
            *c = Complex64::default();
        } else {
            *c *= Complex64::new(0.0, k[j]);
        }
    }
}

/// Gradient of a real field, one component per axis.
pub fn gradient(grid: &SpectralGrid, field: &[f64]) -> Result<Vec<Vec<f64>>> {
    let base = forward(grid, field)?;
    let mut out = Vec::with_capacity(grid.dimension());
    for axis in 0..grid.dimension() {
        let mut spec = base.clone();
        derivative_spectrum(grid, &mut spec, axis);
        out.push(inverse(grid, &spec)?);
    }
    Ok(out)
}

/// Translate a real field by `shift` (length units) via spectral phase shift.
///
/// Exact for band-limited data; the unpaired Nyquist bin is carried with a
/// real `cos(k s)` factor so the output stays real.
pub fn translate(grid: &SpectralGrid, field: &[f64], shift: &[f64]) -> Result<Vec<f64>> {
    if shift.len() < grid.dimension() {
        return Err(KgError::usage(format!(
            "shift has {} components, grid dimension is {}",
            shift.len(),
            grid.dimension()
        )));
    }
    let mut spec = forward(grid, field)?;
    let n = grid.points_per_axis();
    let half = n / 2;
    let k = grid.axis_wavenumbers();
    // per-axis phase tables
    let mut phases: Vec<Vec<Complex64>> = Vec::with_capacity(grid.dimension());
    for axis in 0..grid.dimension() {
        let s = shift[axis];
        phases.push(
            (0..n)
                .map(|j| {
                    if j == half {
                        Complex64::new((k[j] * s).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, -k[j] * s)
                    }
                })
                .collect(),
        );
    }
    for (flat, c) in spec.iter_mut().enumerate() {
        let idx = grid.unravel(flat);
        for axis in 0..grid.dimension() {
            *c *= phases[axis][idx[axis]];
        }
    }
    inverse(grid, &spec)
}

/// Translate by a whole number of grid cells with an exact index roll.
pub fn roll(grid: &SpectralGrid, field: &[f64], cells: &[i64]) -> Result<Vec<f64>> {
    check_shape(grid, field.len())?;
    let n = grid.points_per_axis() as i64;
    let mut out = vec![0.0; field.len()];
    for (flat, v) in out.iter_mut().enumerate() {
        let idx = grid.unravel(flat);
        let mut src = [0usize; 3];
        for a in 0..grid.dimension() {
            src[a] = (idx[a] as i64 - cells[a]).rem_euclid(n) as usize;
        }
        *v = field[grid.ravel(&src)];
    }
    Ok(out)
}

/// Zero all modes outside the 2/3-rule keep region (Nyquist included).
pub fn dealias(grid: &SpectralGrid, field: &[f64]) -> Result<Vec<f64>> {
    let mut spec = forward(grid, field)?;
    let mask = grid.dealias_mask();
    for (c, keep) in spec.iter_mut().zip(mask.iter()) {
        if !keep {
            *c = Complex64::default();
        }
    }
    inverse(grid, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid1d() -> SpectralGrid {
        SpectralGrid::new(1, 64, 5.0).unwrap()
    }

    #[test]
    fn dc_field_concentrates_in_mode_zero() {
        let g = grid1d();
        let spec = forward(&g, &vec![1.0; g.len()]).unwrap();
        assert!((spec[0].re - 64.0).abs() < 1e-12);
        for c in &spec[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn single_harmonic_hits_two_conjugate_modes() {
        let g = grid1d();
        let x = g.axis_coords();
        let field: Vec<f64> = x
            .iter()
            .map(|&x| (std::f64::consts::PI * x / g.half_length()).cos())
            .collect();
        let spec = forward(&g, &field).unwrap();
        for (j, c) in spec.iter().enumerate() {
            if j == 1 || j == 63 {
                // sampling starts at x = -L, so the m = +-1 coefficients carry
                // the phase e^{i pi} = -1
                assert!((c.re + 32.0).abs() < 1e-10, "bin {j}: {c}");
                assert!(c.im.abs() < 1e-10);
            } else {
                assert!(c.norm() < 1e-10, "bin {j} should be empty: {c}");
            }
        }
    }

    #[test]
    fn shape_mismatch_is_usage_error() {
        let g = grid1d();
        assert!(forward(&g, &[0.0; 3]).is_err());
    }

    #[test]
    fn roll_matches_spectral_translate_for_integer_shift() {
        let g = grid1d();
        let x = g.axis_coords();
        let field: Vec<f64> = x.iter().map(|&x| (-x * x).exp()).collect();
        let h = g.spacing();
        let a = translate(&g, &field, &[3.0 * h]).unwrap();
        let b = roll(&g, &field, &[3]).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = grid1d();
        let k1 = std::f64::consts::PI / g.half_length();
        let x = g.axis_coords();
        let field: Vec<f64> = x.iter().map(|&x| (k1 * x).sin()).collect();
        let gr = gradient(&g, &field).unwrap();
        for (i, &x) in x.iter().enumerate() {
            assert!((gr[0][i] - k1 * (k1 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn multidim_roundtrip() {
        let g = SpectralGrid::new(2, 16, 2.0).unwrap();
        let field: Vec<f64> = (0..g.len()).map(|i| ((i * 37 % 101) as f64) / 50.0 - 1.0).collect();
        let back = inverse(&g, &forward(&g, &field).unwrap()).unwrap();
        for (a, b) in field.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn roundtrip_random_fields(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = grid1d();
            let field: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let back = inverse(&g, &forward(&g, &field).unwrap()).unwrap();
            let norm: f64 = field.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err: f64 = field
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            prop_assert!(err <= 1e-12 * norm.max(1.0));
        }
    }
}
