//! Observables of a field (mass, energy, variance, the weighted commutator
//! norm ‖(x+2it∇)u‖²), recorded rows, time series, and decay estimators.

use crate::dynamics::{Params, Sample, Trajectory};
use crate::error::Error;
use crate::grid::{boundary_mass_fraction, grad_norm_sq, gradient_axis, Field};
use crate::initialdata::quadratic_phase;
use crate::{exec, Result, C64};

/// One row of scalar diagnostics at a fixed time.
#[derive(Clone, Copy, Debug)]
pub struct ObservableRow {
    pub t: f64,
    /// ∫|u|².
    pub mass: f64,
    /// ½‖∇u‖² - λ/(α+2)·∫|u|^{α+2}.
    pub energy: f64,
    /// ‖∇u‖₂².
    pub grad_l2_sq: f64,
    /// ∫|u|^{α+2}.
    pub l_alpha2: f64,
    /// ∫|x|²|u|².
    pub variance: f64,
    /// ‖(x+2it∇)u‖₂².
    pub pt_norm_sq: f64,
    /// |t|^{(αd-4)/2}·‖(x+2it∇)u‖² (limits at t = 0 by continuity).
    pub n_monitor: f64,
    /// Mass fraction in the boundary shell (per-axis |x| > 0.9L).
    pub boundary_fraction: f64,
    /// All finite and boundary fraction within tolerance.
    pub valid: bool,
}

/// ∫|u|².
pub fn mass(f: &Field) -> f64 {
    f.l2_norm_sq()
}

/// ½‖∇u‖² - λ/(α+2)·∫|u|^{α+2} (conserved by the flow).
pub fn energy(f: &Field, p: &Params) -> f64 {
    0.5 * grad_norm_sq(f) - p.lambda() / (p.alpha() + 2.0) * f.lp_norm_pow(p.alpha() + 2.0)
}

/// ∫|x|²|u|².
pub fn variance(f: &Field) -> f64 {
    let g = f.grid().clone();
    exec::sum_indexed(f.values(), |i, v| g.x_sq(i) * v.norm_sqr()) * g.cell_volume()
}

/// ‖(x+2it∇)u‖², choosing the accurate evaluation for the given t:
/// the direct sum for |t| below the grid's phase-resolution time and the
/// factored form 4t²‖∇(e^{-i|x|²/4t}u)‖² beyond it, where the removed
/// quadratic phase is too oscillatory to difference directly.
pub fn pt_norm_sq(f: &Field, t: f64) -> f64 {
    if t == 0.0 {
        variance(f)
    } else if t.abs() < f.grid().phase_resolution_time() {
        pt_norm_sq_direct(f, t)
    } else {
        pt_norm_sq_phase(f, t)
    }
}

/// Direct evaluation Σ_a ‖x_a u + 2it ∂_a u‖².
pub fn pt_norm_sq_direct(f: &Field, t: f64) -> f64 {
    let g = f.grid().clone();
    let vol = g.cell_volume();
    let two_t = 2.0 * t;
    let mut total = 0.0;
    for axis in 0..g.d() {
        let du = gradient_axis(f, axis);
        let fv = f.values();
        let sum = exec::sum_indexed(du.values(), |i, dv| {
            let x = g.point(i)[axis];
            let w = x * fv[i] + C64::new(0.0, two_t) * dv;
            w.norm_sqr()
        });
        total += sum * vol;
    }
    total
}

/// Factored evaluation 4t²‖∇(e^{-i|x|²/(4t)}u)‖².
pub fn pt_norm_sq_phase(f: &Field, t: f64) -> f64 {
    let w = quadratic_phase(f, -1.0 / t);
    4.0 * t * t * grad_norm_sq(&w)
}

/// The d per-axis fields (x_a + 2it∂_a)u, by the route matching `t`.
pub fn p_fields(f: &Field, t: f64) -> Vec<Field> {
    let g = f.grid().clone();
    let direct = t == 0.0 || t.abs() < g.phase_resolution_time();
    if direct {
        (0..g.d())
            .map(|axis| {
                let mut du = gradient_axis(f, axis);
                let fv = f.values();
                let gg = g.clone();
                let two_t = 2.0 * t;
                exec::map_indexed(du.values_mut(), |i, dv| {
                    gg.point(i)[axis] * fv[i] + C64::new(0.0, two_t) * dv
                });
                du
            })
            .collect()
    } else {
        // (x+2it∇)u = 2it·e^{i|x|²/4t}·∇(e^{-i|x|²/4t}u)
        let w = quadratic_phase(f, -1.0 / t);
        (0..g.d())
            .map(|axis| {
                let dw = gradient_axis(&w, axis);
                quadratic_phase(&dw, 1.0 / t).scale(C64::new(0.0, 2.0 * t))
            })
            .collect()
    }
}

/// |t|^{(αd-4)/2}·‖(x+2it∇)u‖², continued to t = 0: +∞ below the critical
/// coupling (variance permitting), the variance at it, 0 above it.
pub fn n_monitor(f: &Field, t: f64, p: &Params) -> f64 {
    let gap = 0.5 * (p.alpha_d() - 4.0);
    if t == 0.0 {
        let var = variance(f);
        if gap.abs() < 1e-12 {
            var
        } else if gap < 0.0 {
            if var > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            0.0
        }
    } else {
        t.abs().powf(gap) * pt_norm_sq(f, t)
    }
}

/// Record every scalar diagnostic at time `t`.
pub fn row(f: &Field, t: f64, p: &Params, boundary_tol: f64) -> ObservableRow {
    let mass_v = mass(f);
    let grad_sq = grad_norm_sq(f);
    let l_alpha2 = f.lp_norm_pow(p.alpha() + 2.0);
    let energy_v = 0.5 * grad_sq - p.lambda() / (p.alpha() + 2.0) * l_alpha2;
    let variance_v = variance(f);
    let pt = pt_norm_sq(f, t);
    let nm = n_monitor(f, t, p);
    let boundary = boundary_mass_fraction(f);
    let valid = !f.diverged()
        && mass_v.is_finite()
        && energy_v.is_finite()
        && pt.is_finite()
        && boundary <= boundary_tol;
    ObservableRow {
        t,
        mass: mass_v,
        energy: energy_v,
        grad_l2_sq: grad_sq,
        l_alpha2,
        variance: variance_v,
        pt_norm_sq: pt,
        n_monitor: nm,
        boundary_fraction: boundary,
        valid,
    }
}

/// A labeled scalar time series on strictly increasing times.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    label: String,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<TimeSeries> {
        if times.is_empty() {
            return Err(Error::EmptySeries);
        }
        if times.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("series entries must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        Ok(TimeSeries { label: label.into(), times, values })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Extract a series from a run, skipping samples whose value is not finite.
pub fn series_from(
    traj: &Trajectory,
    label: impl Into<String>,
    extract: impl Fn(&Sample) -> f64,
) -> Result<TimeSeries> {
    let mut times = Vec::with_capacity(traj.samples.len());
    let mut values = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let v = extract(s);
        if v.is_finite() {
            times.push(s.t);
            values.push(v);
        }
    }
    TimeSeries::new(label, times, values)
}

/// ‖u(t)‖_{α+2} over a run, from the recorded ∫|u|^{α+2} column.
pub fn alpha2_norm_series(traj: &Trajectory) -> Result<TimeSeries> {
    let inv = 1.0 / (traj.params.alpha() + 2.0);
    series_from(traj, "lp_norm", |s| s.row.l_alpha2.powf(inv))
}

/// sup over samples (t > 0) of t^β·v. With β = 1/a this is the weak
/// time-Lorentz functional; with β a decay rate it bounds sup t^β‖u(t)‖.
pub fn weighted_sup_norm(series: &TimeSeries, beta: f64) -> Result<f64> {
    let mut best: Option<f64> = None;
    for (&t, &v) in series.times().iter().zip(series.values()) {
        if t <= 0.0 {
            continue;
        }
        let w = t.powf(beta) * v;
        best = Some(best.map_or(w, |b: f64| b.max(w)));
    }
    best.ok_or(Error::EmptySeries)
}

/// max_i t_i^{1/a}·v_i (finite-sample weak-Lorentz functional).
pub fn weak_lorentz_time_norm(series: &TimeSeries, a: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidArgument(format!("Lorentz exponent must be positive, got {a}")));
    }
    weighted_sup_norm(series, 1.0 / a)
}

/// Finite-horizon free-decay functional: the maximum of t^β·‖e^{itΔ}u0‖_{L^p}
/// over a geometric time ladder in (0, t_max]. Estimates the supremum over
/// all positive times from below; monotone non-decreasing in both the horizon
/// and the ladder density.
pub fn free_decay_sup_norm(
    u0: &Field,
    t_max: f64,
    n_samples: usize,
    beta: f64,
    p: f64,
) -> Result<f64> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "decay-rate weight must be non-negative, got {beta}"
        )));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Lebesgue exponent must be at least 1, got {p}"
        )));
    }
    let ladder = geometric_ladder(t_max, n_samples)?;
    let mut best = 0.0f64;
    for t in ladder {
        let ut = crate::grid::free_propagate(u0, t);
        best = best.max(t.powf(beta) * ut.lp_norm(p));
    }
    Ok(best)
}

/// Least-squares fit of v ≈ C·t^{-p} on log-log axes over the last `window`
/// usable points (0 = all). Returns (p, r²); needs ≥ 5 positive samples.
pub fn fit_decay_exponent(series: &TimeSeries, window: usize) -> Result<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = series
        .times()
        .iter()
        .zip(series.values())
        .filter(|(&t, &v)| t > 0.0 && v > 0.0)
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .collect();
    if window > 0 && pts.len() > window {
        pts.drain(..pts.len() - window);
    }
    let n = pts.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs at least 5 positive samples, have {n}"
        )));
    }
    let nf = n as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let (mx, my) = (sx / nf, sy / nf);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all samples at one time".into()));
    }
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    // A series constant to roundoff has no decay to fit: report exponent 0
    // with a perfect score instead of amplifying ulp noise into a slope.
    if ss_tot <= 1e-28 * nf * (1.0 + my * my) {
        return Ok((0.0, 1.0));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let fit = my + slope * (p.0 - mx);
            (p.1 - fit) * (p.1 - fit)
        })
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((-slope, r2))
}

/// Ascending dyadic times t_max·2^{-(count-1)}, …, t_max/2, t_max.
pub fn geometric_ladder(t_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {t_max}")));
    }
    if count < 2 {
        return Err(Error::InvalidArgument(format!("ladder needs at least 2 rungs, got {count}")));
    }
    Ok((0..count)
        .map(|j| t_max * (0.5f64).powi((count - 1 - j) as i32))
        .collect())
}
