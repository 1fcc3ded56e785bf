//! Pseudospectral solver and soliton-resolution diagnostics for the damped
//! focusing Klein-Gordon equation
//!
//! ```text
//! u_tt - Lap u + u + 2 alpha u_t - |u|^{p-1} u = 0
//! ```
//!
//! on a periodic box approximating `R^d` (d = 1, 2, 3). The crate provides
//!
//! * a spectral substrate (transforms, Littlewood-Paley projectors, norms,
//!   energy, translations) in [`grid`], [`spectral`], [`projector`], [`field`];
//! * equilibrium solvers (`-Lap Q + Q = |Q|^{p-1}Q`) by shooting and by
//!   Petviashvili iteration in [`equilibria`];
//! * a Strang-split integrator with exact per-mode damped linear flow in
//!   [`evolution`];
//! * localization diagnostics (frequency tails, concentration points,
//!   exterior energy) in [`diagnostics`];
//! * the decomposition of a state into translated equilibria and the
//!   blowup / unbounded / resolved classifier in [`resolution`];
//! * binary checkpoint and profile containers in [`io`].

pub mod diagnostics;
pub mod equilibria;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod io;
pub mod projector;
pub mod resolution;
pub mod spectral;

pub use error::{KgError, Result};
