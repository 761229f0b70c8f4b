//! End-to-end acceptance suite: thirteen desk-scale checks covering
//! conservation, solitary-wave fidelity, ground-state invariants, the free
//! propagator, frame-change identities, the critical conservation law,
//! chirped-data identities, both scattering dichotomies, non-scattering,
//! estimator oracles, and the chirp-scattering trend.
//!
//! Runs every criterion sequentially, prints one PASS/FAIL line each, and
//! exits nonzero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};

use nls_core::dynamics::{
    evolve_nonautonomous, evolve_sampled, evolve_with, EvolveOptions, Params, StepMode, Trajectory,
};
use nls_core::grid::{free_propagate, make_grid, Field};
use nls_core::groundstate::{from_closed_form_1d, petviashvili, PetviashviliOptions};
use nls_core::initialdata::{gaussian, oscillating_data, oscillating_identity_residual};
use nls_core::observables::{
    alpha2_norm_series, fit_decay_exponent, free_decay_sup_norm, geometric_ladder,
    weak_lorentz_time_norm, TimeSeries,
};
use nls_core::pcx::{identity_residuals, to_pcx};
use nls_core::scattering::{
    convergence_to_free, lower_bound_compare, run_classify, sigma_norm, ClassifySetup, Verdict,
};
use nls_core::thresholds::{classify_field, exponents, Strictness, ThresholdRegime};
use nls_core::C64;

type CheckResult = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn max_energy_drift(traj: &Trajectory) -> f64 {
    let e0 = traj.samples[0].row.energy;
    traj.samples
        .iter()
        .map(|s| (s.row.energy - e0).abs() / e0.abs())
        .fold(0.0, f64::max)
}

fn max_mass_drift(traj: &Trajectory) -> f64 {
    let m0 = traj.samples[0].row.mass;
    traj.samples
        .iter()
        .map(|s| (s.row.mass - m0).abs() / m0)
        .fold(0.0, f64::max)
}

/// c01 — mass conserved to 1e-10 and energy to 1e-6 along a solitary-wave
/// run; halving dt divides the energy error by ~4 on generic data. The exact
/// solitary-wave orbit conserves the splitting method's modified energy to
/// fourth order (measured drift sits at the roundoff floor with dt-halving
/// ratios near 16), so the second-order ratio is demonstrated on Gaussian
/// data, where the leading error term does not vanish.
fn c01_conservation(ctx: &mut Ctx) -> CheckResult {
    let g = make_grid(1, 4096, 40.0).unwrap();
    let p = Params::new(1, 2.0, 1.0).unwrap();
    let q = from_closed_form_1d(&g, 2.0).unwrap();
    let opts = EvolveOptions { store_fields: true, ..Default::default() };
    let traj = evolve_with(q.field(), 0.0, 10.0, 1e-3, &p, 100, &opts, StepMode::Autonomous)
        .map_err(|e| e.to_string())?;
    ensure!(!traj.diverged && traj.domain_valid, "solitary-wave run did not stay valid");

    let mdrift = max_mass_drift(&traj);
    ensure!(mdrift <= 1e-10, "relative mass drift {mdrift:.3e} exceeds 1e-10");
    let edrift = max_energy_drift(&traj);
    ensure!(edrift <= 1e-6, "relative energy drift {edrift:.3e} exceeds 1e-6");

    let u0 = gaussian(&g, 1.0, 1.0);
    let lean = EvolveOptions { store_fields: false, ..Default::default() };
    let coarse = evolve_with(&u0, 0.0, 10.0, 1e-3, &p, 100, &lean, StepMode::Autonomous)
        .map_err(|e| e.to_string())?;
    let fine = evolve_with(&u0, 0.0, 10.0, 5e-4, &p, 200, &lean, StepMode::Autonomous)
        .map_err(|e| e.to_string())?;
    let ratio = max_energy_drift(&coarse) / max_energy_drift(&fine);
    ensure!(
        (3.5..=4.5).contains(&ratio),
        "dt-halving energy-drift ratio {ratio:.3} outside [3.5, 4.5]"
    );

    ctx.soliton = Some((q.field().clone(), q.mass(), traj));
    Ok(())
}

/// c02 — the numerical solitary wave tracks the exact orbit e^{it}Q in L²
/// to 1e-4 at t = 5.
fn c02_solitary_wave_fidelity(ctx: &mut Ctx) -> CheckResult {
    let (q_field, q_mass, traj) = ctx.soliton.as_ref().ok_or("needs the c01 run")?;
    let sample = traj
        .samples
        .iter()
        .find(|s| (s.t - 5.0).abs() < 1e-9)
        .ok_or("no sample at t = 5")?;
    let ut = sample.field.as_ref().ok_or("fields were not stored")?;
    let reference = q_field.scale(C64::from_polar(1.0, 5.0));
    let fid = ut.sub(&reference).map_err(|e| e.to_string())?.l2_norm_sq().sqrt() / q_mass.sqrt();
    ensure!(fid <= 1e-4, "relative L² distance to the exact orbit {fid:.3e} exceeds 1e-4");
    Ok(())
}

/// c03 — ground-state suite: the fixed-point iteration reproduces the 1-d
/// closed form to 1e-6 in L^∞; Pohozaev residuals ≤ 1e-6 (1-d, powers 2, 4,
/// 6) and ≤ 1e-5 (2-d cubic); the interpolation functional at Q matches the
/// sharp constant to 1e-6, including the critical-power value 4/π².
fn c03_ground_state_suite(_ctx: &mut Ctx) -> CheckResult {
    let g = make_grid(1, 2048, 20.0).unwrap();
    for &alpha in &[2.0f64, 4.0, 6.0] {
        let gs = petviashvili(&g, alpha, PetviashviliOptions::default()).map_err(|e| e.to_string())?;
        let exact = from_closed_form_1d(&g, alpha).unwrap();
        let linf = gs.field().sub(exact.field()).unwrap().max_abs();
        ensure!(linf <= 1e-6, "power {alpha}: L^∞ gap to closed form {linf:.3e} exceeds 1e-6");
        let (r1, r2) = gs.pohozaev_residuals();
        ensure!(
            r1 <= 1e-6 && r2 <= 1e-6,
            "power {alpha}: Pohozaev residuals {r1:.3e}, {r2:.3e} exceed 1e-6"
        );
        let gn_gap = (gs.gn_constant() - exact.gn_constant()).abs();
        ensure!(gn_gap <= 1e-6, "power {alpha}: sharp-constant gap {gn_gap:.3e} exceeds 1e-6");
    }
    // critical-power sharp constant against its closed form 4/π²
    let c_exact = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let gs4 = from_closed_form_1d(&g, 4.0).unwrap();
    let gap = (gs4.gn_constant() - c_exact).abs();
    ensure!(gap <= 1e-6, "critical sharp constant off by {gap:.3e}");
    // 2-d cubic profile from the iteration alone
    let g2 = make_grid(2, 256, 14.0).unwrap();
    let gs2 = petviashvili(&g2, 2.0, PetviashviliOptions::default()).map_err(|e| e.to_string())?;
    let (s1, s2) = gs2.pohozaev_residuals();
    ensure!(
        s1 <= 1e-5 && s2 <= 1e-5,
        "2-d Pohozaev residuals {s1:.3e}, {s2:.3e} exceed 1e-5"
    );
    Ok(())
}

/// c04 — free propagator against the closed-form spreading Gaussian,
/// pointwise to 1e-8 at t ∈ {0.5, 1, 2}.
fn c04_free_propagator_oracle(_ctx: &mut Ctx) -> CheckResult {
    let g = make_grid(1, 2048, 30.0).unwrap();
    let u0 = gaussian(&g, 1.0, 1.0);
    for &t in &[0.5f64, 1.0, 2.0] {
        let ut = free_propagate(&u0, t);
        let denom = C64::new(1.0, 2.0 * t);
        let mut worst = 0.0f64;
        for (i, v) in ut.values().iter().enumerate() {
            let x = g.point(i)[0];
            let exact = denom.powf(-0.5) * (C64::new(-x * x, 0.0) / (2.0 * denom)).exp();
            worst = worst.max((v - exact).norm());
        }
        ensure!(worst <= 1e-8, "t = {t}: pointwise gap {worst:.3e} exceeds 1e-8");
    }
    Ok(())
}

/// c05 — frame-change identity residuals ≤ 1e-6 along a defocusing
/// trajectory at s ∈ {0.2, 0.5, 0.8}, and finite-difference energy rates
/// matching the closed-form laws at second order under step halving.
fn c05_frame_change_identities(_ctx: &mut Ctx) -> CheckResult {
    let g = make_grid(1, 2048, 40.0).unwrap();
    let p = Params::new(1, 3.0, -1.0).unwrap();
    let u0 = gaussian(&g, 0.8, 1.0);

    // identities on snapshots of the physical-frame run at s = t/(1+t)
    let traj = evolve_sampled(&u0, 0.0, &p, 1e-3, &[0.25, 1.0, 4.0], &EvolveOptions::default())
        .map_err(|e| e.to_string())?;
    for s in &traj.samples[1..] {
        let pair = to_pcx(s.field.as_ref().unwrap(), s.t).map_err(|e| e.to_string())?;
        let res = identity_residuals(&pair, &p);
        ensure!(
            res.t1 <= 1e-6 && res.t2 <= 1e-6 && res.t3 <= 1e-6,
            "s = {:.1}: identity residuals ({:.3e}, {:.3e}, {:.3e}) exceed 1e-6",
            pair.s,
            res.t1,
            res.t2,
            res.t3
        );
    }

    // companion-frame energies against their closed-form s-derivatives
    let v0 = to_pcx(&u0, 0.0).unwrap().v;
    let lean = EvolveOptions { store_fields: false, ..Default::default() };
    let run = evolve_nonautonomous(&v0, 0.0, 0.7, 2.5e-4, &p, 25, &lean).map_err(|e| e.to_string())?;
    let ds_sample = 0.00625f64;
    let e_at = |i: usize| run.samples[i].pcx_energies.unwrap();
    let i0 = (0.5 / ds_sample).round() as usize;
    let row = &run.samples[i0].row;
    let m = 0.5 * (p.alpha_d() - 4.0);
    let rate1 = m * 0.5f64.powf(m - 1.0) * (p.lambda() / (p.alpha() + 2.0)) * row.l_alpha2;
    let rate2 = 0.5 * m * 0.5f64.powf(-m - 1.0) * row.grad_l2_sq;
    let fd_err = |h: f64| {
        let k = (h / ds_sample).round() as usize;
        let d1 = (e_at(i0 + k).0 - e_at(i0 - k).0) / (2.0 * h);
        let d2 = (e_at(i0 + k).1 - e_at(i0 - k).1) / (2.0 * h);
        ((d1 - rate1).abs(), (d2 - rate2).abs())
    };
    let (c1, c2) = fd_err(0.05);
    let (f1, f2) = fd_err(0.025);
    let (r1, r2) = (c1 / f1, c2 / f2);
    ensure!(
        (3.2..=4.8).contains(&r1) && (3.2..=4.8).contains(&r2),
        "halving convergence ratios ({r1:.2}, {r2:.2}) outside [3.2, 4.8]"
    );
    Ok(())
}

/// c06 — at the critical power the commutator-norm bracket is an exact
/// invariant: relative drift from ‖xu₀‖² stays ≤ 1e-4 over t ∈ [0.5, 5].
fn c06_critical_conservation_law(_ctx: &mut Ctx) -> CheckResult {
    let g = make_grid(1, 8192, 120.0).unwrap();
    let p = Params::new(1, 4.0, -1.0).unwrap();
    let u0 = gaussian(&g, 1.0, std::f64::consts::FRAC_1_SQRT_2);
    let w0 = nls_core::observables::variance(&u0);
    let lean = EvolveOptions { store_fields: false, ..Default::default() };
    let traj = evolve_with(&u0, 0.0, 5.0, 1e-3, &p, 500, &lean, StepMode::Autonomous)
        .map_err(|e| e.to_string())?;
    for s in &traj.samples {
        if s.t < 0.5 {
            continue;
        }
        let bracket =
            s.row.pt_norm_sq - (8.0 * p.lambda() * s.t * s.t / (p.alpha() + 2.0)) * s.row.l_alpha2;
        let drift = (bracket - w0).abs() / w0;
        ensure!(drift <= 1e-4, "t = {}: bracket drift {drift:.3e} exceeds 1e-4", s.t);
    }
    Ok(())
}

/// c07 — propagating chirped data equals the phase-dilation form of the
/// plain propagation (residual ≤ 1e-8 over a (b, t) grid), and the chirp
/// leaves the mass unchanged to 1e-12.
fn c07_chirped_data_identity(_ctx: &mut Ctx) -> CheckResult {
    let g = make_grid(1, 4096, 32.0).unwrap();
    let phi = gaussian(&g, 1.0, 1.0);
    let m_ref = oscillating_data(&phi, 0.5).map_err(|e| e.to_string())?.l2_norm_sq();
    for &b in &[0.5f64, 1.0, 2.0, 4.0] {
        let m = oscillating_data(&phi, b).map_err(|e| e.to_string())?.l2_norm_sq();
        let gap = (m - m_ref).abs() / m_ref;
        ensure!(gap <= 1e-12, "b = {b}: mass changed by {gap:.3e}");
        for &t in &[0.25f64, 0.5, 1.0] {
            let r = oscillating_identity_residual(&phi, b, t).map_err(|e| e.to_string())?;
            ensure!(r <= 1e-8, "b = {b}, t = {t}: identity residual {r:.3e} exceeds 1e-8");
        }
    }
    Ok(())
}

/// c08 — defocusing dichotomy: small Gaussian data scatters; the Cauchy
/// increments decrease past their onset; the fitted decay of ‖u‖_{α+2}
/// is within 15% of the free rate αd/(2(α+2)) = 0.3; and the distance to
/// the extracted free profile has a decreasing tail ending ≤ 1e-2 of the
/// profile's weighted norm.
fn c08_defocusing_scattering(_ctx: &mut Ctx) -> CheckResult {
    let g = make_grid(1, 4096, 512.0).unwrap();
    let p = Params::new(1, 3.0, -1.0).unwrap();
    let u0 = gaussian(&g, 0.2, 1.0);
    let setup =
        ClassifySetup { horizon: 40.0, n_samples: 8, dt: 1e-3, tol_rel: 1e-3, ..Default::default() };
    let (traj, report) = run_classify(&u0, &p, &setup).map_err(|e| e.to_string())?;
    ensure!(report.verdict == Verdict::Scattered, "verdict {:?}, wanted Scattered", report.verdict);

    let incs = report.cauchy.as_ref().ok_or("no increment series")?;
    let vals = incs.values();
    let imax = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    ensure!(imax <= 1, "increments still growing at rung {imax}");
    for w in vals[imax..].windows(2) {
        ensure!(w[1] < w[0], "increments not decreasing past onset: {vals:?}");
    }
    ensure!(
        *vals.last().unwrap() < 0.5 * vals[imax],
        "final increment did not drop below half the peak"
    );

    let series = alpha2_norm_series(&traj).map_err(|e| e.to_string())?;
    let (pfit, r2) = fit_decay_exponent(&series, 5).map_err(|e| e.to_string())?;
    ensure!(
        (pfit - 0.3).abs() <= 0.045,
        "fitted decay exponent {pfit:.4} (r² = {r2:.4}) not within 15% of 0.3"
    );

    let u_plus = report.scattering_state.as_ref().ok_or("no scattering state")?;
    let conv = convergence_to_free(&traj, u_plus).map_err(|e| e.to_string())?;
    let cv = conv.values();
    let n = cv.len();
    ensure!(n >= 3, "too few convergence samples");
    ensure!(
        cv[n - 1] <= cv[n - 2] && cv[n - 2] <= cv[n - 3],
        "distance-to-free tail is not decreasing: {cv:?}"
    );
    let scale = sigma_norm(u_plus).total;
    ensure!(
        cv[n - 2] <= 1e-2 * scale,
        "distance to the free profile {:.3e} exceeds 1e-2·{scale:.3e}",
        cv[n - 2]
    );
    Ok(())
}

/// c09 — focusing dichotomy about the ground-state thresholds: data
/// strictly below both product thresholds scatters; the same profile
/// rescaled to negative energy (gradient product above the ground-state
/// line, threshold quantity negative) collapses.
fn c09_focusing_threshold_dichotomy(_ctx: &mut Ctx) -> CheckResult {
    let p = Params::new(1, 6.0, 1.0).unwrap();

    let g = make_grid(1, 4096, 512.0).unwrap();
    let q = from_closed_form_1d(&g, 6.0).unwrap();
    let u0 = gaussian(&g, 0.4, 1.0);
    let verdict = classify_field(&u0, &q, &p).map_err(|e| e.to_string())?;
    ensure!(verdict.regime == ThresholdRegime::Intercritical, "wrong regime");
    ensure!(
        verdict.below_mass_energy == Strictness::StrictlyBelow
            && verdict.below_mass_gradient == Strictness::StrictlyBelow
            && verdict.admits_scattering_claim,
        "small data not strictly below both thresholds"
    );
    let setup =
        ClassifySetup { horizon: 16.0, n_samples: 8, dt: 1e-3, tol_rel: 1e-3, ..Default::default() };
    let (_, report) = run_classify(&u0, &p, &setup).map_err(|e| e.to_string())?;
    ensure!(
        report.verdict == Verdict::Scattered,
        "below-threshold verdict {:?}, wanted Scattered",
        report.verdict
    );

    let g2 = make_grid(1, 2048, 20.0).unwrap();
    let q2 = from_closed_form_1d(&g2, 6.0).unwrap();
    let u1 = gaussian(&g2, 1.35, 1.0);
    let energy = nls_core::observables::energy(&u1, &p);
    ensure!(energy < 0.0, "rescaled data has energy {energy:.3}, wanted negative");
    let v2 = classify_field(&u1, &q2, &p).map_err(|e| e.to_string())?;
    ensure!(v2.eta0 < 0.0, "threshold quantity {:.3e} should be negative at E < 0", v2.eta0);
    ensure!(
        v2.below_mass_gradient == Strictness::Above && !v2.admits_scattering_claim,
        "negative-energy data should sit above the gradient threshold"
    );
    let setup2 =
        ClassifySetup { horizon: 2.0, n_samples: 4, dt: 2e-4, tol_rel: 1e-3, ..Default::default() };
    let (traj2, report2) = run_classify(&u1, &p, &setup2).map_err(|e| e.to_string())?;
    ensure!(
        report2.verdict == Verdict::BlowupDetected,
        "negative-energy verdict {:?}, wanted BlowupDetected",
        report2.verdict
    );
    ensure!(traj2.diverged_at.is_some(), "divergence time missing");
    Ok(())
}

/// c10 — critical-power mass dichotomy: data with mass strictly below the
/// ground state's stays global over t ∈ [0, 20] with bounded gradient;
/// scaled to negative energy it collapses.
fn c10_critical_mass_dichotomy(_ctx: &mut Ctx) -> CheckResult {
    let p = Params::new(1, 4.0, 1.0).unwrap();
    let g = make_grid(1, 4096, 512.0).unwrap();
    let q = from_closed_form_1d(&g, 4.0).unwrap();
    let u0 = gaussian(&g, 1.0, std::f64::consts::FRAC_1_SQRT_2);
    ensure!(u0.l2_norm_sq() < q.mass(), "test data is not below the critical mass");
    let verdict = classify_field(&u0, &q, &p).map_err(|e| e.to_string())?;
    ensure!(
        verdict.regime == ThresholdRegime::MassCritical && verdict.admits_scattering_claim,
        "sub-threshold comparison failed"
    );
    let lean = EvolveOptions { store_fields: false, ..Default::default() };
    let traj = evolve_with(&u0, 0.0, 20.0, 1e-3, &p, 200, &lean, StepMode::Autonomous)
        .map_err(|e| e.to_string())?;
    ensure!(!traj.diverged && traj.domain_valid, "sub-threshold run did not stay global");
    let g0 = traj.samples[0].row.grad_l2_sq;
    let gmax = traj.samples.iter().map(|s| s.row.grad_l2_sq).fold(0.0, f64::max);
    ensure!(gmax <= 4.0 * g0, "gradient grew {gmax:.3} from {g0:.3}; not bounded");

    let g2 = make_grid(1, 2048, 20.0).unwrap();
    let u1 = gaussian(&g2, 2.5, std::f64::consts::FRAC_1_SQRT_2);
    let energy = nls_core::observables::energy(&u1, &p);
    ensure!(energy < 0.0, "supercritical data has energy {energy:.3}, wanted negative");
    let setup =
        ClassifySetup { horizon: 1.0, n_samples: 4, dt: 2e-4, tol_rel: 1e-3, ..Default::default() };
    let (_, report) = run_classify(&u1, &p, &setup).map_err(|e| e.to_string())?;
    ensure!(
        report.verdict == Verdict::BlowupDetected,
        "supercritical verdict {:?}, wanted BlowupDetected",
        report.verdict
    );
    Ok(())
}

/// c11 — the standing wave does not scatter: NonScattering verdict, a flat
/// ‖u‖_{α+2} plateau, and consistency with the algebraic lower bound on
/// non-scattering decay.
fn c11_standing_wave_non_scattering(_ctx: &mut Ctx) -> CheckResult {
    let g = make_grid(1, 512, 20.0).unwrap();
    let p = Params::new(1, 2.0, 1.0).unwrap();
    let u0 = from_closed_form_1d(&g, 2.0).unwrap().field().clone();
    let setup =
        ClassifySetup { horizon: 40.0, n_samples: 8, dt: 2e-3, tol_rel: 1e-4, ..Default::default() };
    let (traj, report) = run_classify(&u0, &p, &setup).map_err(|e| e.to_string())?;
    ensure!(
        report.verdict == Verdict::NonScattering,
        "verdict {:?}, wanted NonScattering",
        report.verdict
    );
    let series = alpha2_norm_series(&traj).map_err(|e| e.to_string())?;
    let (lo, hi) = series
        .values()
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    ensure!(hi / lo <= 1.01, "norm series is not a plateau: spans [{lo:.6}, {hi:.6}]");
    let table = exponents(1, 2.0).map_err(|e| e.to_string())?;
    let lb = lower_bound_compare(&series, &table, None).map_err(|e| e.to_string())?;
    ensure!(
        lb.respects_bound && lb.fitted.0.abs() <= 0.02,
        "plateau decay {:.3e} conflicts with the lower bound {:.3}",
        lb.fitted.0,
        lb.rate_bound
    );
    Ok(())
}

/// c12 — estimator oracles: the weak time-Lorentz functional is exact on
/// pure power decay, the log-log fit recovers exponents through 0.5%
/// multiplicative noise, and the exponent tables solve their defining
/// quadratics to roundoff (with the d = 3 upper root exactly 1).
fn c12_estimator_oracles(_ctx: &mut Ctx) -> CheckResult {
    let table = exponents(1, 3.0).map_err(|e| e.to_string())?;
    let a = table.a_exponent;
    let times = geometric_ladder(100.0, 30).map_err(|e| e.to_string())?;
    let values: Vec<f64> = times.iter().map(|t| t.powf(-1.0 / a)).collect();
    let s = TimeSeries::new("power", times, values).map_err(|e| e.to_string())?;
    let w = weak_lorentz_time_norm(&s, a).map_err(|e| e.to_string())?;
    ensure!((w - 1.0).abs() <= 0.02, "weak-Lorentz value {w:.6} off unity by more than 2%");

    // faster decay: the supremum sits at the left endpoint and equals 1
    let times2: Vec<f64> = (1..=100).map(|i| i as f64).collect();
    let values2: Vec<f64> = times2.iter().map(|t| t.powf(-2.0 / a)).collect();
    let s2 = TimeSeries::new("fast", times2, values2).map_err(|e| e.to_string())?;
    let w2 = weak_lorentz_time_norm(&s2, a).map_err(|e| e.to_string())?;
    ensure!((w2 - 1.0).abs() <= 1e-12, "left-endpoint supremum {w2:.6} should be 1");

    // exponent recovery through deterministic multiplicative noise
    let times3: Vec<f64> = (1..=40).map(|i| 0.3 * i as f64).collect();
    let values3: Vec<f64> = times3
        .iter()
        .enumerate()
        .map(|(i, t)| 2.0 * t.powf(-0.75) * (1.0 + 0.005 * (i as f64 * 12.9898).sin()))
        .collect();
    let s3 = TimeSeries::new("noisy", times3, values3).map_err(|e| e.to_string())?;
    let (pfit, _) = fit_decay_exponent(&s3, 0).map_err(|e| e.to_string())?;
    ensure!((0.72..=0.78).contains(&pfit), "noisy fit {pfit:.4} outside [0.72, 0.78]");

    for d in 1..=3usize {
        let t = exponents(d, 2.0).map_err(|e| e.to_string())?;
        let df = d as f64;
        let lower = df * t.alpha_lower * t.alpha_lower + df * t.alpha_lower - 4.0;
        let upper = df * t.alpha_star * t.alpha_star + (df - 2.0) * t.alpha_star - 4.0;
        ensure!(
            lower.abs() <= 1e-12 && upper.abs() <= 1e-12,
            "d = {d}: root residuals {lower:.3e}, {upper:.3e} exceed 1e-12"
        );
    }
    let t3 = exponents(3, 2.0).map_err(|e| e.to_string())?;
    ensure!(t3.alpha_star == 1.0, "d = 3 upper root {} is not exactly 1", t3.alpha_star);
    Ok(())
}

/// c13 — chirped-data scattering trend at the borderline power: the
/// finite-horizon free-decay functional decreases monotonically in the
/// chirp and tracks the b^{-2/μ₀} law within a factor of 2, and the
/// largest chirp scatters under the full nonlinear flow.
fn c13_chirp_scattering_trend(_ctx: &mut Ctx) -> CheckResult {
    let alpha = (1.0 + 17.0f64.sqrt()) / 2.0;
    let p = Params::new(1, alpha, 1.0).unwrap();
    let table = exponents(1, alpha).map_err(|e| e.to_string())?;
    let beta = 2.0 / table.mu0;

    let bs = [1.0f64, 2.0, 4.0, 8.0];
    let ns = [4096usize, 8192, 16384, 32768];
    let mut est = Vec::new();
    for (&b, &n) in bs.iter().zip(&ns) {
        let g = make_grid(1, n, 72.0).unwrap();
        let phi = gaussian(&g, 0.5, 0.5);
        let u0 = oscillating_data(&phi, b).map_err(|e| e.to_string())?;
        est.push(free_decay_sup_norm(&u0, 2.0, 12, beta, table.nu0).map_err(|e| e.to_string())?);
    }
    for w in est.windows(2) {
        ensure!(w[1] < w[0], "free-decay functional not decreasing in the chirp: {est:?}");
    }
    let measured = (est[3] / est[0]).ln();
    let predicted = -beta * 8.0f64.ln();
    ensure!(
        (measured - predicted).abs() <= 2.0f64.ln(),
        "trend mismatch: measured ratio {:.4} vs predicted {:.4} beyond a factor 2",
        est[3] / est[0],
        8.0f64.powf(-beta)
    );

    let g = make_grid(1, 65536, 96.0).unwrap();
    let phi = gaussian(&g, 0.5, 0.5);
    let u0 = oscillating_data(&phi, 8.0).map_err(|e| e.to_string())?;
    let opts = EvolveOptions { boundary_tol: 1e-3, ..Default::default() };
    let setup = ClassifySetup { horizon: 4.0, n_samples: 10, dt: 1e-3, tol_rel: 0.015, opts };
    let (traj, report) = run_classify(&u0, &p, &setup).map_err(|e| e.to_string())?;
    ensure!(traj.domain_valid, "largest-chirp run left the resolved domain");
    ensure!(
        report.verdict == Verdict::Scattered,
        "largest-chirp verdict {:?}, wanted Scattered",
        report.verdict
    );
    Ok(())
}

/// State shared between criteria (c02 reuses the c01 run).
#[derive(Default)]
struct Ctx {
    soliton: Option<(Field, f64, Trajectory)>,
}

fn main() {
    let checks: Vec<(&str, fn(&mut Ctx) -> CheckResult)> = vec![
        ("c01 conservation", c01_conservation),
        ("c02 solitary-wave fidelity", c02_solitary_wave_fidelity),
        ("c03 ground-state suite", c03_ground_state_suite),
        ("c04 free-propagator oracle", c04_free_propagator_oracle),
        ("c05 frame-change identities", c05_frame_change_identities),
        ("c06 critical conservation law", c06_critical_conservation_law),
        ("c07 chirped-data identity", c07_chirped_data_identity),
        ("c08 defocusing scattering", c08_defocusing_scattering),
        ("c09 focusing threshold dichotomy", c09_focusing_threshold_dichotomy),
        ("c10 critical mass dichotomy", c10_critical_mass_dichotomy),
        ("c11 standing-wave non-scattering", c11_standing_wave_non_scattering),
        ("c12 estimator oracles", c12_estimator_oracles),
        ("c13 chirp scattering trend", c13_chirp_scattering_trend),
    ];

    let mut ctx = Ctx::default();
    let mut failures = 0usize;
    let started = std::time::Instant::now();
    for (name, check) in checks {
        let t0 = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&mut ctx)));
        let elapsed = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(Ok(())) => println!("ACCEPTANCE {name}: PASS ({elapsed:.1}s)"),
            Ok(Err(msg)) => {
                failures += 1;
                println!("ACCEPTANCE {name}: FAIL — {msg} ({elapsed:.1}s)");
            }
            Err(panic) => {
                failures += 1;
                let msg = panic
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| panic.downcast_ref::<&str>().copied())
                    .unwrap_or("panicked");
                println!("ACCEPTANCE {name}: FAIL — panic: {msg} ({elapsed:.1}s)");
            }
        }
    }
    println!(
        "ACCEPTANCE summary: {} of 13 passed in {:.1}s",
        13 - failures,
        started.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
