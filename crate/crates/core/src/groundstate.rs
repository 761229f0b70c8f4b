//! Ground states of -ΔQ + Q = |Q|^α Q: the explicit 1-d solitary-wave
//! profile, a Petviashvili fixed-point solver for d ≥ 1, Pohozaev identity
//! checks, and the sharp Gagliardo-Nirenberg constant they determine.

use std::sync::Arc;

use crate::error::Error;
use crate::grid::{grad_norm_sq, neg_laplacian, Field, Grid};
use crate::{exec, Result, C64};

/// The positive even solution of Q'' - Q + Q^{α+1} = 0 on the line:
/// Q(x) = ((α+2)/2)^{1/α} · sech^{2/α}(αx/2).
pub fn soliton_profile_1d(alpha: f64) -> impl Fn(f64) -> f64 {
    let amp = (0.5 * (alpha + 2.0)).powf(1.0 / alpha);
    let pow = 2.0 / alpha;
    move |x: f64| {
        let sech = 1.0 / (0.5 * alpha * x).cosh();
        amp * sech.powf(pow)
    }
}

/// A computed (or sampled) ground state together with its equation residual
/// ‖-ΔQ + Q - |Q|^α Q‖_{L²} and the iteration count that produced it.
#[derive(Clone, Debug)]
pub struct GroundState {
    field: Field,
    alpha: f64,
    residual: f64,
    iterations: usize,
}

impl GroundState {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// ‖Q‖₂².
    pub fn mass(&self) -> f64 {
        self.field.l2_norm_sq()
    }

    /// ‖∇Q‖₂².
    pub fn grad_norm_sq(&self) -> f64 {
        grad_norm_sq(&self.field)
    }

    /// ∫|Q|^{α+2}.
    pub fn potential_pow(&self) -> f64 {
        self.field.lp_norm_pow(self.alpha + 2.0)
    }

    /// Energy with unit focusing coupling: ½‖∇Q‖² - ∫|Q|^{α+2}/(α+2).
    pub fn energy_focusing(&self) -> f64 {
        0.5 * self.grad_norm_sq() - self.potential_pow() / (self.alpha + 2.0)
    }

    /// Relative residuals of the two Pohozaev identities
    ///   ‖Q‖₂² = c₁‖∇Q‖₂²,  c₁ = (4 - (d-2)α)/(αd),
    ///   ‖Q‖₂² = c₂∫|Q|^{α+2},  c₂ = (4 - (d-2)α)/(2(α+2)).
    pub fn pohozaev_residuals(&self) -> (f64, f64) {
        let d = self.field.grid().d() as f64;
        let a = self.alpha;
        let m = self.mass();
        let g = self.grad_norm_sq();
        let p = self.potential_pow();
        let c1 = (4.0 - (d - 2.0) * a) / (a * d);
        let c2 = (4.0 - (d - 2.0) * a) / (2.0 * (a + 2.0));
        ((m - c1 * g).abs() / m, (m - c2 * p).abs() / m)
    }

    /// Sharp constant of ‖f‖_{α+2}^{α+2} ≤ C ‖∇f‖₂^{αd/2} ‖f‖₂^{α+2-αd/2},
    /// attained at Q: C = ∫|Q|^{α+2} / (‖∇Q‖^{αd/2}·‖Q‖^{α+2-αd/2}).
    pub fn gn_constant(&self) -> f64 {
        let d = self.field.grid().d() as f64;
        gn_ratio(self.mass(), self.grad_norm_sq(), self.potential_pow(), d, self.alpha)
    }
}

/// ∫|f|^{α+2} / (‖∇f‖₂^{αd/2}·‖f‖₂^{α+2-αd/2}) from the three invariants.
pub fn gn_ratio(mass: f64, grad_sq: f64, pot_pow: f64, d: f64, alpha: f64) -> f64 {
    let a_exp = alpha * d / 4.0; // on the squared gradient
    let b_exp = (2.0 * (alpha + 2.0) - alpha * d) / 4.0; // on the squared mass
    pot_pow / (grad_sq.powf(a_exp) * mass.powf(b_exp))
}

/// Sample the explicit 1-d profile on a grid; the reported residual is the
/// discretization error of the closed form.
pub fn from_closed_form_1d(grid: &Arc<Grid>, alpha: f64) -> Result<GroundState> {
    if grid.d() != 1 {
        return Err(Error::InvalidArgument(
            "closed-form profile exists only in dimension 1".into(),
        ));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("power must be positive, got {alpha}")));
    }
    let q = soliton_profile_1d(alpha);
    let field = Field::from_fn(grid, |x| C64::new(q(x[0]), 0.0));
    let residual = equation_residual(&field, alpha);
    Ok(GroundState { field, alpha, residual, iterations: 0 })
}

/// ‖-Δw + w - |w|^α w‖_{L²}, evaluated spectrally.
pub fn equation_residual(field: &Field, alpha: f64) -> f64 {
    let lap = neg_laplacian(field);
    let vol = field.grid().cell_volume();
    let values = field.values();
    let sum = exec::sum_indexed(lap.values(), |i, l| {
        let w = values[i];
        let nl = w * w.norm().powf(alpha);
        (l + w - nl).norm_sqr()
    });
    (sum * vol).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct PetviashviliOptions {
    pub max_iter: usize,
    /// Convergence target for the equation residual.
    pub tol: f64,
}

impl Default for PetviashviliOptions {
    fn default() -> Self {
        PetviashviliOptions { max_iter: 400, tol: 1e-10 }
    }
}

/// Petviashvili fixed-point iteration for -ΔQ + Q = |Q|^α Q:
///
///   w ← S^γ (-Δ+1)^{-1}(|w|^α w),   S = (‖∇w‖² + ‖w‖²)/∫|w|^{α+2},
///
/// with γ = (α+1)/α, starting from a Gaussian bump and symmetrized under
/// reflection every step so the profile stays centered. Converges when the
/// equation residual drops below `tol`; errors with the final residual
/// otherwise.
pub fn petviashvili(
    grid: &Arc<Grid>,
    alpha: f64,
    opts: PetviashviliOptions,
) -> Result<GroundState> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("power must be positive, got {alpha}")));
    }
    let d = grid.d() as f64;
    if (d - 2.0) * alpha >= 4.0 {
        return Err(Error::InvalidArgument(format!(
            "no ground state: power {alpha} is energy-supercritical in dimension {d}"
        )));
    }
    let gamma = (alpha + 1.0) / alpha;
    let vol = grid.cell_volume();
    let plan = grid.plan();

    // Start from a centered bump of moderate amplitude.
    let mut w = Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        C64::new(1.5 * (-r2).exp(), 0.0)
    });

    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        // N(w) = |w|^α w (real iterates; modulus keeps odd powers sign-safe).
        let mut nw = w.clone();
        exec::map_indexed(nw.values_mut(), |_, v| v * v.norm().powf(alpha));

        // S = (‖∇w‖² + ‖w‖²)/⟨N(w), w⟩.
        let grad_sq = grad_norm_sq(&w);
        let l2_sq = w.l2_norm_sq();
        let wv = w.values();
        let pairing = exec::sum_indexed(nw.values(), |i, v| (v * wv[i].conj()).re) * vol;
        if !(pairing.is_finite() && pairing > 0.0) {
            return Err(Error::DivergedIterate(format!(
                "nonlinear pairing became {pairing} at iteration {iter}"
            )));
        }
        let s = (grad_sq + l2_sq) / pairing;
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::DivergedIterate(format!(
                "stabilization factor became {s} at iteration {iter}"
            )));
        }

        // w ← S^γ (-Δ+1)^{-1} N(w), computed spectrally.
        let g = grid.clone();
        let s_gamma = s.powf(gamma);
        plan.forward(&g, nw.values_mut());
        let scale = s_gamma / g.len() as f64;
        exec::map_indexed(nw.values_mut(), |i, v| v * (scale / (1.0 + g.k_sq(i))));
        plan.inverse_unscaled(&g, nw.values_mut());

        // Keep iterates real and even: drop the imaginary roundoff and
        // average with the reflection x → -x (index j → (n-j) mod n).
        symmetrize(&mut nw);
        w = nw;

        if !w.is_finite() {
            return Err(Error::DivergedIterate(format!(
                "iterate became non-finite at iteration {iter}"
            )));
        }
        residual = equation_residual(&w, alpha);
        if residual < opts.tol {
            return Ok(GroundState { field: w, alpha, residual, iterations: iter });
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, residual })
}

/// Replace f by the real, reflection-even part: ½(Re f(x) + Re f(-x)).
fn symmetrize(f: &mut Field) {
    let g = f.grid().clone();
    let n = g.n();
    let d = g.d();
    let values = f.values_mut();
    let reflect = |flat: usize| -> usize {
        let mut rest = flat;
        let mut out = 0usize;
        let mut mul = 1usize;
        for _ in 0..d {
            let j = rest % n;
            let rj = if j == 0 { 0 } else { n - j };
            out += rj * mul;
            mul *= n;
            rest /= n;
        }
        out
    };
    for i in 0..values.len() {
        let r = reflect(i);
        if r < i {
            continue;
        }
        let avg = 0.5 * (values[i].re + values[r].re);
        values[i] = C64::new(avg, 0.0);
        values[r] = C64::new(avg, 0.0);
    }
}
