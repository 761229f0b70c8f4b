//! Exponent bookkeeping and sharp scattering/blow-up thresholds.
//!
//! For the focusing equation at and above the critical coupling αd = 4 the
//! scale-invariant products ‖u‖₂^σ‖∇u‖₂ and M[u]^σ·E[u] sit below, at, or
//! above their ground-state values; strict inequality on both is the
//! hypothesis under which global scattering is claimed.

use crate::dynamics::Params;
use crate::error::Error;
use crate::grid::{grad_norm_sq, Field};
use crate::groundstate::GroundState;
use crate::observables;
use crate::Result;

/// Derived exponents for dimension d and power α. Entries that lose meaning
/// at αd = 4 are options; the d = 2 decay exponent has no closed form here
/// and is supplied by the caller where needed.
#[derive(Clone, Copy, Debug)]
pub struct ExponentTable {
    pub d: usize,
    pub alpha: f64,
    /// α·d.
    pub alpha_d: f64,
    /// Critical coupling power 4/d.
    pub mass_critical_power: f64,
    /// 4/(d-2); infinite for d ≤ 2.
    pub energy_critical_power: f64,
    /// σ = (4-(d-2)α)/(αd-4); None at αd = 4.
    pub sigma: Option<f64>,
    /// τ = 2/(αd-4); None at αd = 4.
    pub tau: Option<f64>,
    /// Decay exponent θ: 1-2/α (d = 1), caller-supplied (d = 2),
    /// (d+2)/4-1/α (d = 3).
    pub theta: Option<f64>,
    /// a = 2α(α+2)/(4-α(d-2)) (weak time-Lorentz exponent).
    pub a_exponent: f64,
    /// β = (4-(d-2)α)/(2α(α+2)) (decay-rate weight, β = 1/a·(…)).
    pub beta: f64,
    /// Positive root of d·x² + (d-2)·x - 4 = 0: the power above which the
    /// strong rapid-decay route applies.
    pub alpha_star: f64,
    /// Positive root of d·x² + d·x - 4 = 0: the lower admissible power for
    /// the weighted-space scattering construction.
    pub alpha_lower: f64,
    /// 16/(3d+2).
    pub conv_bound: f64,
    /// μ₀ = 4(d+2)(α+2)/(αd²).
    pub mu0: f64,
    /// ν₀ = (d+2)(α+2)/(α+d+2).
    pub nu0: f64,
}

/// Build the exponent table; α must be positive and finite.
pub fn exponents(d: usize, alpha: f64) -> Result<ExponentTable> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!("dimension {d} not in 1..=3")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("power must be positive, got {alpha}")));
    }
    let df = d as f64;
    let alpha_d = alpha * df;
    let gap = alpha_d - 4.0;
    let critical = gap.abs() < 1e-12;
    let sigma = (!critical).then(|| (4.0 - (df - 2.0) * alpha) / gap);
    let tau = (!critical).then(|| 2.0 / gap);
    let theta = match d {
        1 => Some(1.0 - 2.0 / alpha),
        2 => None,
        _ => Some((df + 2.0) / 4.0 - 1.0 / alpha),
    };
    let denom = 4.0 - alpha * (df - 2.0);
    let a_exponent = 2.0 * alpha * (alpha + 2.0) / denom;
    let beta = denom / (2.0 * alpha * (alpha + 2.0));
    let alpha_star = (2.0 - df + (df * df + 12.0 * df + 4.0).sqrt()) / (2.0 * df);
    let alpha_lower = (-df + (df * df + 16.0 * df).sqrt()) / (2.0 * df);
    let energy_critical_power = if d <= 2 { f64::INFINITY } else { 4.0 / (df - 2.0) };
    Ok(ExponentTable {
        d,
        alpha,
        alpha_d,
        mass_critical_power: 4.0 / df,
        energy_critical_power,
        sigma,
        tau,
        theta,
        a_exponent,
        beta,
        alpha_star,
        alpha_lower,
        conv_bound: 16.0 / (3.0 * df + 2.0),
        mu0: 4.0 * (df + 2.0) * (alpha + 2.0) / (alpha * df * df),
        nu0: (df + 2.0) * (alpha + 2.0) / (alpha + df + 2.0),
    })
}

/// Position of a scale-invariant quantity relative to its sharp threshold,
/// with a 10⁻⁹ relative band counting as the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strictness {
    StrictlyBelow,
    Boundary,
    Above,
}

fn strictness_of(ratio: f64) -> Strictness {
    const BAND: f64 = 1e-9;
    if ratio < 1.0 - BAND {
        Strictness::StrictlyBelow
    } else if ratio <= 1.0 + BAND {
        Strictness::Boundary
    } else {
        Strictness::Above
    }
}

/// Which sharp threshold applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdRegime {
    /// αd = 4: the mass alone is compared with the ground state's.
    MassCritical,
    /// 4 < αd (and α energy-subcritical): the M^σE and M^σ‖∇‖² products.
    Intercritical,
}

/// Outcome of comparing initial data with the ground-state thresholds.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdVerdict {
    pub regime: ThresholdRegime,
    /// λ-normalized threshold quantity: mass ratio (critical) or
    /// λ^{2τ}M^σE / (M[Q]^σE[Q]) (intercritical; negative if E < 0).
    pub eta0: f64,
    /// Position of the mass/energy product relative to the threshold.
    pub below_mass_energy: Strictness,
    /// Position of the gradient product λ^τ‖u‖^σ‖∇u‖ relative to
    /// ‖Q‖^σ‖∇Q‖ (mirrors the mass comparison in the critical case).
    pub below_mass_gradient: Strictness,
    /// Signed relative margins (positive = below threshold).
    pub margin_energy: f64,
    pub margin_gradient: f64,
    /// Both comparisons strictly below: the scattering hypothesis holds.
    pub admits_scattering_claim: bool,
}

/// Compare initial-data invariants (mass, ‖∇u₀‖², energy at coupling λ)
/// against the ground state `q`. Applies only to focusing couplings at or
/// above the critical power and below the energy-critical one.
pub fn classify_threshold(
    mass: f64,
    grad_sq: f64,
    energy: f64,
    q: &GroundState,
    p: &Params,
) -> Result<ThresholdVerdict> {
    if (q.alpha() - p.alpha()).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "ground state is for power {}, parameters use {}",
            q.alpha(),
            p.alpha()
        )));
    }
    if q.field().grid().d() != p.d() {
        return Err(Error::InvalidArgument(format!(
            "ground state is {}-dimensional, parameters use {}",
            q.field().grid().d(),
            p.d()
        )));
    }
    if p.lambda() <= 0.0 {
        return Err(Error::NotApplicable(
            "thresholds compare focusing data; the coupling is defocusing".into(),
        ));
    }
    let table = exponents(p.d(), p.alpha())?;
    if p.alpha() + 1e-12 < table.mass_critical_power {
        return Err(Error::NotApplicable(format!(
            "power {} is below the critical power {}; no threshold applies",
            p.alpha(),
            table.mass_critical_power
        )));
    }
    if p.alpha() >= table.energy_critical_power {
        return Err(Error::NotApplicable(format!(
            "power {} is energy-critical or beyond in dimension {}",
            p.alpha(),
            p.d()
        )));
    }
    if !(mass.is_finite() && mass > 0.0 && grad_sq.is_finite() && energy.is_finite()) {
        return Err(Error::InvalidArgument(
            "threshold comparison needs finite positive mass and finite energy".into(),
        ));
    }

    let lambda = p.lambda();
    if p.is_mass_critical() {
        let eta0 = lambda.powf(2.0 / p.alpha()) * mass / q.mass();
        let s = strictness_of(eta0);
        return Ok(ThresholdVerdict {
            regime: ThresholdRegime::MassCritical,
            eta0,
            below_mass_energy: s,
            below_mass_gradient: s,
            margin_energy: 1.0 - eta0,
            margin_gradient: 1.0 - eta0,
            admits_scattering_claim: s == Strictness::StrictlyBelow,
        });
    }

    let sigma = table.sigma.unwrap();
    let tau = table.tau.unwrap();
    let me_q = q.mass().powf(sigma) * q.energy_focusing();
    let grad_q = q.mass().powf(0.5 * sigma) * q.grad_norm_sq().sqrt();
    let eta0 = lambda.powf(2.0 * tau) * mass.powf(sigma) * energy / me_q;
    let grad_ratio = lambda.powf(tau) * mass.powf(0.5 * sigma) * grad_sq.sqrt() / grad_q;
    let below_e = strictness_of(eta0);
    let below_g = strictness_of(grad_ratio);
    Ok(ThresholdVerdict {
        regime: ThresholdRegime::Intercritical,
        eta0,
        below_mass_energy: below_e,
        below_mass_gradient: below_g,
        margin_energy: 1.0 - eta0,
        margin_gradient: 1.0 - grad_ratio,
        admits_scattering_claim: below_e == Strictness::StrictlyBelow
            && below_g == Strictness::StrictlyBelow,
    })
}

/// Convenience wrapper computing the invariants from a field.
pub fn classify_field(u0: &Field, q: &GroundState, p: &Params) -> Result<ThresholdVerdict> {
    classify_threshold(
        u0.l2_norm_sq(),
        grad_norm_sq(u0),
        observables::energy(u0, p),
        q,
        p,
    )
}

/// The variational lower bound f(x) = ½x² - C/(α+2)·x^{αd/2} satisfying
/// M^σE ≥ f(‖∇u‖‖u‖^σ) with C the sharp interpolation constant. Its critical
/// point is ‖Q‖^σ‖∇Q‖ and its value there is M[Q]^σ·E[Q].
pub fn f_eval(x: f64, c_gn: f64, d: usize, alpha: f64) -> f64 {
    0.5 * x * x - c_gn / (alpha + 2.0) * x.powf(0.5 * alpha * d as f64)
}
