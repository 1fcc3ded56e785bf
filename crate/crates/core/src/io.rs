//! Binary container formats: "DKGC" checkpoints and "DKGQ" profiles.
//!
//! Both are little-endian with a 4-byte magic and a u32 version; checkpoint
//! round-trips are bit-exact.

use crate::equilibria::{EquilibriumProfile, ProfileShape};
use crate::error::{KgError, Result};
use crate::field::FieldState;
use crate::grid::SpectralGrid;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

const CHECKPOINT_MAGIC: &[u8; 4] = b"DKGC";
const PROFILE_MAGIC: &[u8; 4] = b"DKGQ";
const VERSION: u32 = 1;

fn write_f64s(w: &mut impl Write, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(read_f64(r)?);
    }
    Ok(out)
}

/// Save `(u, u_t)` with grid geometry and run parameters.
pub fn write_checkpoint(path: &Path, state: &FieldState, dt: f64) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(state.grid.dimension() as u32).to_le_bytes())?;
    w.write_all(&(state.grid.points_per_axis() as u32).to_le_bytes())?;
    write_f64s(&mut w, &[state.grid.half_length(), state.exponent, state.damping, state.time, dt])?;
    write_f64s(&mut w, &state.u)?;
    write_f64s(&mut w, &state.ut)?;
    Ok(())
}

/// Load a checkpoint; returns the state and the dt it was produced with.
pub fn read_checkpoint(path: &Path) -> Result<(FieldState, f64)> {
    let file = std::fs::File::open(path)?;
    let mut r = std::io::BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(KgError::Format(format!("bad checkpoint magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(KgError::Format(format!("unsupported checkpoint version {version}")));
    }
    let dimension = read_u32(&mut r)? as usize;
    let points = read_u32(&mut r)? as usize;
    let half_length = read_f64(&mut r)?;
    let exponent = read_f64(&mut r)?;
    let damping = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;
    let dt = read_f64(&mut r)?;
    let grid = Arc::new(SpectralGrid::new(dimension, points, half_length)?);
    let len = grid.len();
    let u = read_f64s(&mut r, len)?;
    let ut = read_f64s(&mut r, len)?;
    let mut state = FieldState::new(grid, u, ut, exponent, damping)?;
    state.time = time;
    Ok((state, dt))
}

/// Save a radial equilibrium profile.
pub fn write_profile(path: &Path, profile: &EquilibriumProfile) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    let (radii, values) = profile.samples();
    w.write_all(PROFILE_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(profile.dimension as u32).to_le_bytes())?;
    write_f64s(&mut w, &[profile.exponent])?;
    w.write_all(&(profile.node_count as u32).to_le_bytes())?;
    w.write_all(&(profile.sign as i32).to_le_bytes())?;
    w.write_all(&(radii.len() as u64).to_le_bytes())?;
    write_f64s(&mut w, &radii)?;
    write_f64s(&mut w, &values)?;
    Ok(())
}

/// Load a profile saved by [`write_profile`]. Radii must be uniform.
pub fn read_profile(path: &Path) -> Result<EquilibriumProfile> {
    let file = std::fs::File::open(path)?;
    let mut r = std::io::BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != PROFILE_MAGIC {
        return Err(KgError::Format(format!("bad profile magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(KgError::Format(format!("unsupported profile version {version}")));
    }
    let dimension = read_u32(&mut r)? as usize;
    let exponent = read_f64(&mut r)?;
    let node_count = read_u32(&mut r)? as usize;
    let mut sign_buf = [0u8; 4];
    r.read_exact(&mut sign_buf)?;
    let sign = i32::from_le_bytes(sign_buf);
    if sign != 1 && sign != -1 {
        return Err(KgError::Format(format!("profile sign must be +-1, got {sign}")));
    }
    let mut count_buf = [0u8; 8];
    r.read_exact(&mut count_buf)?;
    let count = u64::from_le_bytes(count_buf) as usize;
    if count < 2 {
        return Err(KgError::Format("profile needs at least two samples".into()));
    }
    let radii = read_f64s(&mut r, count)?;
    let values = read_f64s(&mut r, count)?;
    let step = radii[1] - radii[0];
    if !(step > 0.0) || radii[0] != 0.0 {
        return Err(KgError::Format("profile radii must start at 0 and increase".into()));
    }
    for (i, &rad) in radii.iter().enumerate() {
        if (rad - i as f64 * step).abs() > 1e-9 * (1.0 + rad) {
            return Err(KgError::Format("profile radii must be uniformly spaced".into()));
        }
    }
    let mut profile = EquilibriumProfile {
        dimension,
        exponent,
        node_count,
        sign: sign as i8,
        shape: ProfileShape::Sampled { step, values },
        residual: 0.0,
    };
    profile.residual = crate::equilibria::radial_ode_residual(&profile);
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria;

    #[test]
    fn checkpoint_roundtrip_is_bit_exact() {
        let dir = std::env::temp_dir().join(format!("kgr-io-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let grid = Arc::new(SpectralGrid::new(1, 64, 10.0).unwrap());
        let u: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin() * 1.0e-3).collect();
        let ut: Vec<f64> = (0..64).map(|i| (i as f64 * 0.11).cos()).collect();
        let mut state = FieldState::new(grid, u, ut, 3.0, 0.25).unwrap();
        state.time = 12.625;
        let path = dir.join("state.dkgc");
        write_checkpoint(&path, &state, 1e-3).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let (loaded, dt) = read_checkpoint(&path).unwrap();
        assert_eq!(dt, 1e-3);
        assert_eq!(loaded.time, state.time);
        assert_eq!(loaded.u, state.u);
        assert_eq!(loaded.ut, state.ut);
        let path2 = dir.join("state2.dkgc");
        write_checkpoint(&path2, &loaded, dt).unwrap();
        assert_eq!(bytes1, std::fs::read(&path2).unwrap());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn profile_roundtrip_preserves_shape() {
        let dir = std::env::temp_dir().join(format!("kgr-io-prof-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let profile = equilibria::radial_shoot(1, 3.0, 0, &Default::default()).unwrap();
        let path = dir.join("ground.dkgq");
        write_profile(&path, &profile).unwrap();
        let loaded = read_profile(&path).unwrap();
        assert_eq!(loaded.dimension, 1);
        assert_eq!(loaded.node_count, 0);
        for i in 0..100 {
            let r = i as f64 * 0.1;
            assert!((loaded.eval_radial(r) - profile.eval_radial(r)).abs() < 1e-10);
        }
        assert!(loaded.residual <= 1e-6);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = std::env::temp_dir().join(format!("kgr-io-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("junk.dkgc");
        std::fs::write(&path, b"NOPE1234").unwrap();
        assert!(matches!(read_checkpoint(&path), Err(KgError::Format(_))));
        std::fs::remove_dir_all(&dir).ok();
    }
}
