//! Initial-data families: Gaussians, 1-d solitary-wave profiles, and
//! quadratically chirped ("oscillating") variants e^{ib|x|²/4}·φ, together
//! with the exact lens identity satisfied by the free flow on such data.

use std::sync::Arc;

use crate::error::Error;
use crate::grid::{free_propagate, make_grid, resample, Field, Grid};
use crate::groundstate;
use crate::{Result, C64};

/// A family of initial conditions, realizable on any grid.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSpec {
    /// A·e^{-|x|²/(2w²)}.
    Gaussian { amplitude: f64, width: f64 },
    /// scale·Q(x) with Q the 1-d solitary-wave profile for the grid's α.
    Soliton { scale: f64 },
    /// e^{ib|x|²/4}·base.
    Oscillating { b: f64, base: Box<DataSpec> },
    /// Explicit sample values (must match the grid size).
    Custom { values: Vec<C64> },
}

impl DataSpec {
    /// Sample the family on `grid`. `alpha` is the nonlinearity power; only
    /// the solitary-wave family reads it.
    pub fn realize(&self, grid: &Arc<Grid>, alpha: f64) -> Result<Field> {
        match self {
            DataSpec::Gaussian { amplitude, width } => {
                if !(width.is_finite() && *width > 0.0) || !amplitude.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "gaussian needs finite amplitude and positive width, got A={amplitude}, w={width}"
                    )));
                }
                Ok(gaussian(grid, *amplitude, *width))
            }
            DataSpec::Soliton { scale } => {
                if grid.d() != 1 {
                    return Err(Error::InvalidArgument(
                        "solitary-wave data is only defined in dimension 1".into(),
                    ));
                }
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "solitary-wave data needs a positive power, got {alpha}"
                    )));
                }
                let q = groundstate::soliton_profile_1d(alpha);
                Ok(Field::from_fn(grid, |x| C64::new(scale * q(x[0]), 0.0)))
            }
            DataSpec::Oscillating { b, base } => {
                let inner = base.realize(grid, alpha)?;
                oscillating_data(&inner, *b)
            }
            DataSpec::Custom { values } => Field::from_values(grid, values.clone()),
        }
    }
}

/// A·e^{-|x|²/(2w²)} sampled on the grid.
pub fn gaussian(grid: &Arc<Grid>, amplitude: f64, width: f64) -> Field {
    let inv = 1.0 / (2.0 * width * width);
    Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        C64::new(amplitude * (-r2 * inv).exp(), 0.0)
    })
}

/// Multiply by the quadratic phase e^{i·b·|x|²/4} (no resolution check).
pub fn quadratic_phase(f: &Field, b: f64) -> Field {
    let g = f.grid().clone();
    let mut out = f.clone();
    crate::exec::map_indexed(out.values_mut(), |i, v| {
        let (s, c) = (0.25 * b * g.x_sq(i)).sin_cos();
        v * C64::new(c, s)
    });
    out
}

/// Largest chirp rate whose phase is resolved on this grid: the local
/// wavenumber b·L/2 at the box edge must stay below half the axis Nyquist
/// wavenumber, i.e. 2|b|L²/n < π.
pub fn max_resolved_chirp(grid: &Grid) -> f64 {
    std::f64::consts::PI * grid.n() as f64 / (2.0 * grid.half_length() * grid.half_length())
}

/// e^{ib|x|²/4}·f, refusing chirps the grid cannot resolve.
pub fn oscillating_data(f: &Field, b: f64) -> Result<Field> {
    let g = f.grid();
    if !b.is_finite() {
        return Err(Error::InvalidArgument(format!("chirp rate must be finite, got {b}")));
    }
    if b.abs() >= max_resolved_chirp(g) {
        return Err(Error::UnresolvedPhase(format!(
            "chirp rate |b| = {} needs 2|b|L²/n < π; this grid resolves |b| < {:.6}",
            b.abs(),
            max_resolved_chirp(g)
        )));
    }
    Ok(quadratic_phase(f, b))
}

/// Residual of the exact lens identity for the free flow on chirped data:
///
///   e^{itΔ}(e^{ib|x|²/4}φ)
///     = (1+bt)^{-d/2} e^{ib|x|²/(4(1+bt))} ( e^{i(t/(1+bt))Δ} φ )(x/(1+bt)),
///
/// returned as L² norm of the difference divided by ‖φ‖_{L²}. The right-hand
/// side needs the evolved profile at the contracted points x_j/(1+bt), which
/// is obtained by one spectral resampling onto the companion box of half
/// length L/(1+bt).
pub fn oscillating_identity_residual(phi: &Field, b: f64, t: f64) -> Result<f64> {
    let g = phi.grid();
    let factor = 1.0 + b * t;
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lens identity needs 1 + b·t > 0, got {factor}"
        )));
    }
    let chirped = oscillating_data(phi, b)?;
    let lhs = free_propagate(&chirped, t);

    let beta = 1.0 / factor;
    let tau = t * beta;
    let w = free_propagate(phi, tau);
    let companion = make_grid(g.d(), g.n(), g.half_length() * beta)?;
    let w_contracted = resample(&w, &companion)?;

    let half_d = 0.5 * g.d() as f64;
    let pref = beta.powf(half_d);
    let chirp_out = b * beta;
    let mut rhs = Field::from_values(g, w_contracted.values().to_vec())?;
    {
        let gg = g.clone();
        crate::exec::map_indexed(rhs.values_mut(), |i, v| {
            let (s, c) = (0.25 * chirp_out * gg.x_sq(i)).sin_cos();
            v * C64::new(pref * c, pref * s)
        });
    }

    let norm = phi.l2_norm();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero profile has no residual".into()));
    }
    Ok(lhs.sub(&rhs)?.l2_norm() / norm)
}
