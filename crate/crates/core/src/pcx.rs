//! The lens-and-rescale frame change linking a solution u(t, x) on t ≥ 0 to
//! its companion v(s, y) on s = t/(1+t) ∈ [0, 1):
//!
//!   v(s, y) = (1+t)^{d/2} e^{-i|x|²/(4(1+t))} u(t, x),   y = x/(1+t).
//!
//! The companion solves i v_s + Δv + λ(1-s)^{(αd-4)/2}|v|^α v = 0. The map
//! is L²-unitary, sends the (α+2)-norm to a (1+t) power of itself, and
//! exchanges ∇ with the commutator operator x + 2iτ∇ in both directions.

use crate::dynamics::Params;
use crate::error::Error;
use crate::grid::{grad_norm_sq, make_grid, Field};
use crate::initialdata::quadratic_phase;
use crate::observables::pt_norm_sq;
use crate::{exec, Result};

/// A solution snapshot in both frames: u at physical time t on its box, and
/// the companion v at rescaled time s = t/(1+t) on the contracted box.
#[derive(Clone, Debug)]
pub struct PcxPair {
    pub u: Field,
    pub t: f64,
    pub v: Field,
    pub s: f64,
}

fn check_lens_resolved(grid_u: &crate::grid::Grid, t: f64) -> Result<()> {
    let t_star = grid_u.phase_resolution_time();
    if 1.0 + t < t_star {
        return Err(Error::UnresolvedPhase(format!(
            "lens phase |x|²/(4(1+t)) at 1+t = {} oscillates beyond this box's \
             resolution (needs 1+t ≥ {t_star:.6})",
            1.0 + t
        )));
    }
    Ok(())
}

/// Map a physical-frame snapshot u(t) to its companion v(s).
/// The companion lives on the box of half length L/(1+t) with the same n.
pub fn to_pcx(u: &Field, t: f64) -> Result<PcxPair> {
    if !(t.is_finite() && t > -1.0) {
        return Err(Error::InvalidArgument(format!("frame change needs t > -1, got {t}")));
    }
    let g = u.grid();
    check_lens_resolved(g, t)?;
    let tau = 1.0 + t;
    let s = t / tau;
    let companion = make_grid(g.d(), g.n(), g.half_length() / tau)?;
    // v_j = τ^{d/2} e^{-i|x_j|²/(4τ)} u_j, with x_j on u's box.
    let mut w = quadratic_phase(u, -1.0 / tau);
    let amp = tau.powf(0.5 * g.d() as f64);
    exec::map_indexed(w.values_mut(), |_, v| v * amp);
    let v = Field::from_values(&companion, w.values().to_vec())?;
    Ok(PcxPair { u: u.clone(), t, v, s })
}

/// Map a companion-frame snapshot v(s) back to the physical frame u(t),
/// t = s/(1-s), on the dilated box of half length L/(1-s).
pub fn from_pcx(v: &Field, s: f64) -> Result<PcxPair> {
    if !(s.is_finite() && (0.0..1.0).contains(&s)) {
        return Err(Error::InvalidArgument(format!(
            "rescaled time must lie in [0, 1), got {s}"
        )));
    }
    let g = v.grid();
    let one_minus = 1.0 - s;
    let t = s / one_minus;
    let grid_u = make_grid(g.d(), g.n(), g.half_length() / one_minus)?;
    check_lens_resolved(&grid_u, t)?;
    // u_j = (1-s)^{d/2} e^{+i|x_j|²/(4(1+t))} v_j, with x_j on u's box.
    let amp = one_minus.powf(0.5 * g.d() as f64);
    let transplanted = Field::from_values(&grid_u, v.values().to_vec())?;
    let mut u = quadratic_phase(&transplanted, one_minus); // 1/(1+t) = 1-s
    exec::map_indexed(u.values_mut(), |_, w| w * amp);
    Ok(PcxPair { u, t, v: v.clone(), s })
}

/// Relative residuals of the three transform identities.
#[derive(Clone, Copy, Debug)]
pub struct IdentityResiduals {
    /// ‖v‖_{α+2}^{α+2} = (1+t)^{αd/2}·‖u‖_{α+2}^{α+2}
    pub t1: f64,
    /// ‖∇v‖² = ¼‖(x+2i(1+t)∇)u‖²
    pub t2: f64,
    /// ‖∇u‖² = ¼‖(y-2i(1-s)∇)v‖²
    pub t3: f64,
}

/// Evaluate the three identities on a transformed pair.
pub fn identity_residuals(pair: &PcxPair, p: &Params) -> IdentityResiduals {
    let tau = 1.0 + pair.t;
    let pow = p.alpha() + 2.0;

    let lhs1 = pair.v.lp_norm_pow(pow);
    let rhs1 = tau.powf(0.5 * p.alpha_d()) * pair.u.lp_norm_pow(pow);
    let t1 = rel_gap(lhs1, rhs1);

    let lhs2 = grad_norm_sq(&pair.v);
    let rhs2 = 0.25 * pt_norm_sq(&pair.u, tau);
    let t2 = rel_gap(lhs2, rhs2);

    let lhs3 = grad_norm_sq(&pair.u);
    let rhs3 = 0.25 * pt_norm_sq(&pair.v, -(1.0 - pair.s));
    let t3 = rel_gap(lhs3, rhs3);

    IdentityResiduals { t1, t2, t3 }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// The two companion-frame energies at rescaled time s:
///
///   E₁ = ½‖∇v‖² - (1-s)^{(αd-4)/2}·λ/(α+2)·∫|v|^{α+2}
///   E₂ = (1-s)^{(4-αd)/2}·½‖∇v‖² - λ/(α+2)·∫|v|^{α+2}
///
/// They satisfy E₂ = (1-s)^{(4-αd)/2}·E₁ identically, and each is monotone
/// in s on the side of αd - 4 fixed by the sign of λ.
pub fn pcx_energies(v: &Field, s: f64, p: &Params) -> (f64, f64) {
    let m = 0.5 * (p.alpha_d() - 4.0);
    let grad = grad_norm_sq(v);
    let pot = p.lambda() / (p.alpha() + 2.0) * v.lp_norm_pow(p.alpha() + 2.0);
    let one_minus = 1.0 - s;
    let e1 = 0.5 * grad - one_minus.powf(m) * pot;
    let e2 = one_minus.powf(-m) * 0.5 * grad - pot;
    (e1, e2)
}
