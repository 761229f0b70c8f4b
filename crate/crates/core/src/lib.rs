//! Pseudo-spectral toolkit for the nonlinear Schrödinger equation
//!
//!   i u_t + Δu + λ|u|^α u = 0
//!
//! on centered periodic boxes in d = 1..3: split-step Fourier integration,
//! pseudo-conformal frame transport, ground-state computation, sharp-constant
//! thresholds, and scattering diagnostics in the weighted space
//! Σ = { f ∈ H¹ : x·f ∈ L² }.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod groundstate;
pub mod initialdata;
pub mod observables;
pub mod pcx;
pub mod scattering;
pub mod thresholds;

pub use dynamics::{Params, Trajectory};
pub use error::Error;
pub use grid::{make_grid, Field, Grid};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;
