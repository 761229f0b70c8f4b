//! Scattering diagnostics in the weighted space Σ = {f ∈ H¹ : |x|f ∈ L²}:
//! backward-free profiles e^{-itΔ}u(t), Cauchy increments along a dyadic
//! time ladder, run verdicts, rapid-decay checks, and decay-rate floors for
//! solutions that fail to scatter.

use crate::dynamics::{evolve_sampled, EvolveOptions, Params, Trajectory};
use crate::error::Error;
use crate::grid::{free_propagate, grad_norm_sq, Field};
use crate::observables::{
    alpha2_norm_series, fit_decay_exponent, geometric_ladder, p_fields, pt_norm_sq, variance,
    weak_lorentz_time_norm, TimeSeries,
};
use crate::thresholds::ExponentTable;
use crate::Result;

/// The three pieces of ‖f‖_Σ: the H¹ part √(‖f‖² + ‖∇f‖²), the weight part
/// ‖|x|f‖, and the combined √(‖f‖² + ‖∇f‖² + ‖|x|f‖²).
#[derive(Clone, Copy, Debug)]
pub struct SigmaNorm {
    pub h1_part: f64,
    pub weight_part: f64,
    pub total: f64,
}

impl SigmaNorm {
    fn from_parts(l2_sq: f64, grad_sq: f64, weight_sq: f64) -> SigmaNorm {
        SigmaNorm {
            h1_part: (l2_sq + grad_sq).sqrt(),
            weight_part: weight_sq.sqrt(),
            total: (l2_sq + grad_sq + weight_sq).sqrt(),
        }
    }
}

/// ‖f‖_Σ of a field as it stands.
pub fn sigma_norm(f: &Field) -> SigmaNorm {
    SigmaNorm::from_parts(f.l2_norm_sq(), grad_norm_sq(f), variance(f))
}

/// The backward-free profile e^{-itΔ}u(t) (constant in t iff u is free).
pub fn inverse_free_profile(u: &Field, t: f64) -> Field {
    free_propagate(u, -t)
}

/// ‖e^{-itΔ}u(t)‖_Σ without forming |x|e^{-itΔ}u directly: the free flow
/// preserves mass and ‖∇·‖, and ‖x e^{-itΔ}f‖ = ‖(x+2it∇)f‖, so the weight
/// part is the commutator norm evaluated on u itself.
pub fn sigma_norm_inverse_free(u: &Field, t: f64) -> SigmaNorm {
    SigmaNorm::from_parts(u.l2_norm_sq(), grad_norm_sq(u), pt_norm_sq(u, t))
}

/// One precomputed ladder stage: g = e^{-tΔ}u(t) and the backward-free
/// weighted fields e^{-tΔ}(x+2it∇)u(t) (= x·g by the commutation identity).
struct Stage {
    g: Field,
    xg: Vec<Field>,
}

fn stage(u: &Field, t: f64) -> Stage {
    let g = free_propagate(u, -t);
    let xg = p_fields(u, t)
        .into_iter()
        .map(|w| free_propagate(&w, -t))
        .collect();
    Stage { g, xg }
}

fn stage_increment(a: &Stage, b: &Stage) -> Result<f64> {
    let diff = b.g.sub(&a.g)?;
    let h1_sq = diff.l2_norm_sq() + grad_norm_sq(&diff);
    let mut weight_sq = 0.0;
    for (wa, wb) in a.xg.iter().zip(&b.xg) {
        weight_sq += wb.sub(wa)?.l2_norm_sq();
    }
    Ok((h1_sq + weight_sq).sqrt())
}

/// Σ-distance between consecutive backward-free profiles of a run with
/// stored fields: value at t_{n} is ‖e^{-t_nΔ}u(t_n) - e^{-t_{n-1}Δ}u(t_{n-1})‖_Σ.
/// Needs at least 3 positive-time samples.
pub fn cauchy_series(traj: &Trajectory) -> Result<TimeSeries> {
    let usable: Vec<(f64, &Field)> = traj
        .samples
        .iter()
        .filter(|s| s.t > 0.0)
        .map(|s| {
            s.field
                .as_ref()
                .map(|f| (s.t, f))
                .ok_or_else(|| Error::InsufficientData("run did not store fields".into()))
        })
        .collect::<Result<_>>()?;
    if usable.len() < 3 {
        return Err(Error::InsufficientSamples(format!(
            "Cauchy chain needs at least 3 positive-time samples, have {}",
            usable.len()
        )));
    }
    let mut times = Vec::with_capacity(usable.len() - 1);
    let mut values = Vec::with_capacity(usable.len() - 1);
    let mut prev = stage(usable[0].1, usable[0].0);
    for &(t, f) in &usable[1..] {
        let cur = stage(f, t);
        times.push(t);
        values.push(stage_increment(&prev, &cur)?);
        prev = cur;
    }
    TimeSeries::new("sigma_cauchy_increment", times, values)
}

/// Σ-distance of each backward-free profile from a candidate limit u⁺:
/// √(‖g-u⁺‖²_{H¹} + ‖(x-2it∇)(g-u⁺)‖²) with g = e^{-itΔ}u(t), which equals
/// ‖u(t) - e^{itΔ}u⁺‖ measured in the Σ-norm transported to time t.
pub fn convergence_to_free(traj: &Trajectory, u_plus: &Field) -> Result<TimeSeries> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for s in &traj.samples {
        if s.t <= 0.0 {
            continue;
        }
        let f = s
            .field
            .as_ref()
            .ok_or_else(|| Error::InsufficientData("run did not store fields".into()))?;
        let g = free_propagate(f, -s.t);
        let diff = g.sub(u_plus)?;
        let h1_sq = diff.l2_norm_sq() + grad_norm_sq(&diff);
        let w_sq = pt_norm_sq(&diff, -s.t);
        times.push(s.t);
        values.push((h1_sq + w_sq).sqrt());
    }
    TimeSeries::new("sigma_distance_to_free", times, values)
}

/// H¹ increments between consecutive stored companion-frame samples, for
/// continuation-to-s=1 diagnostics of nonautonomous runs.
pub fn companion_h1_increments(traj: &Trajectory) -> Result<TimeSeries> {
    let fields: Vec<(f64, &Field)> = traj
        .samples
        .iter()
        .map(|s| {
            s.field
                .as_ref()
                .map(|f| (s.t, f))
                .ok_or_else(|| Error::InsufficientData("run did not store fields".into()))
        })
        .collect::<Result<_>>()?;
    if fields.len() < 2 {
        return Err(Error::InsufficientSamples("need at least 2 samples".into()));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for w in fields.windows(2) {
        let diff = w[1].1.sub(w[0].1)?;
        times.push(w[1].0);
        values.push((diff.l2_norm_sq() + grad_norm_sq(&diff)).sqrt());
    }
    TimeSeries::new("companion_h1_increment", times, values)
}

/// Outcome of a scattering run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The backward-free profiles form a Cauchy sequence: a limit exists.
    Scattered,
    /// Increments stay large and are not decaying: no free limit forming.
    NonScattering,
    /// The gradient monitor tripped.
    BlowupDetected,
    /// The run ended before the evidence separated the cases.
    Inconclusive,
}

/// Classification report for one run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub verdict: Verdict,
    /// Absolute Σ tolerance the verdict used.
    pub tol: f64,
    pub cauchy: Option<TimeSeries>,
    pub final_increment: Option<f64>,
    /// The last backward-free profile when the run scattered.
    pub scattering_state: Option<Field>,
    /// Log-log decay fit (exponent, r²) of ‖u(t)‖_{α+2}.
    pub decay_fit: Option<(f64, f64)>,
    pub domain_valid: bool,
}

/// Increments in the tail must all exceed this multiple of tol before a
/// non-scattering verdict is considered.
const NONSCATTER_FLOOR: f64 = 10.0;
/// Increments are "not decaying" when their fitted decay exponent is at most
/// this (bound states yield slowly growing, oscillating increments, so the
/// test is one-sided: genuine scattering shows a markedly positive exponent).
const NONSCATTER_SLOPE: f64 = 0.15;

/// Decide the verdict of a ladder run against an absolute Σ tolerance.
pub fn classify_run(traj: &Trajectory, tol: f64) -> Result<RunReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let cauchy = cauchy_series(traj).ok();
    let final_increment = cauchy.as_ref().map(|c| *c.values().last().unwrap());
    let decay_fit = alpha2_norm_series(traj)
        .ok()
        .and_then(|s| fit_decay_exponent(&s, 0).ok());

    if traj.diverged {
        return Ok(RunReport {
            verdict: Verdict::BlowupDetected,
            tol,
            cauchy,
            final_increment,
            scattering_state: None,
            decay_fit,
            domain_valid: traj.domain_valid,
        });
    }

    let c = match &cauchy {
        Some(c) if c.len() >= 2 => c,
        _ => {
            return Ok(RunReport {
                verdict: Verdict::Inconclusive,
                tol,
                cauchy,
                final_increment,
                scattering_state: None,
                decay_fit,
                domain_valid: traj.domain_valid,
            })
        }
    };

    let vals = c.values();
    let last = vals[vals.len() - 1];
    let prev = vals[vals.len() - 2];
    let mut verdict = Verdict::Inconclusive;
    let mut scattering_state = None;

    // Converged: the final increment is under tolerance and either still
    // decreasing or following one already under tolerance (two consecutive
    // sub-tolerance increments need not be ordered — at the roundoff floor
    // they drift).
    if traj.domain_valid && last < tol && (last <= prev || prev < tol) {
        verdict = Verdict::Scattered;
        scattering_state = traj
            .samples
            .iter()
            .rev()
            .find(|s| s.t > 0.0 && s.field.is_some())
            .map(|s| free_propagate(s.field.as_ref().unwrap(), -s.t));
    } else {
        let tail = &vals[vals.len().saturating_sub(3)..];
        let tail_large = tail.iter().all(|&v| v > NONSCATTER_FLOOR * tol);
        let flat = fit_decay_exponent(c, 0)
            .map(|(p, _)| p <= NONSCATTER_SLOPE)
            .unwrap_or(false);
        if tail_large && flat {
            verdict = Verdict::NonScattering;
        }
    }

    Ok(RunReport {
        verdict,
        tol,
        cauchy,
        final_increment,
        scattering_state,
        decay_fit,
        domain_valid: traj.domain_valid,
    })
}

/// Which rapid-decay regime a power belongs to, relative to the strong-decay
/// threshold power (positive root of d·x² + (d-2)x - 4).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayBranch {
    /// α strictly above the threshold: ∫‖u‖^a dt must converge.
    Strong,
    /// α at the threshold: only the weak time-Lorentz functional stays
    /// bounded, so its dyadic refinements must stabilize.
    Weak,
}

/// Rapid-decay diagnostic of a ‖u(t)‖_{α+2} series.
#[derive(Clone, Copy, Debug)]
pub struct RapidDecayReport {
    pub branch: DecayBranch,
    /// Strong: fraction of the trapezoid ∫‖u‖^a dt carried by the last
    /// octave of samples. Weak: W(T)/W(T/2) for the weak-Lorentz functional.
    pub statistic: f64,
    pub passes: bool,
}

/// Check the integrability/boundedness statement that matches the power.
/// The series should span the run's full positive time range.
pub fn rapid_decay_check(
    series: &TimeSeries,
    table: &ExponentTable,
) -> Result<RapidDecayReport> {
    let a = table.a_exponent;
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::NotApplicable(
            "the Lorentz exponent is not positive at this power".into(),
        ));
    }
    let gap = table.alpha - table.alpha_star;
    if gap < -1e-9 {
        return Err(Error::NotApplicable(format!(
            "power {} is below the strong-decay threshold {}",
            table.alpha, table.alpha_star
        )));
    }
    if series.len() < 5 {
        return Err(Error::InsufficientSamples("need at least 5 samples".into()));
    }
    if gap.abs() <= 1e-9 {
        // Threshold power: the weak functional over [0, T] must have
        // stabilized by T/2 already.
        let t_max = *series.times().last().unwrap();
        let half: Vec<(f64, f64)> = series
            .times()
            .iter()
            .zip(series.values())
            .filter(|(&t, _)| t <= 0.5 * t_max)
            .map(|(&t, &v)| (t, v))
            .collect();
        if half.len() < 2 {
            return Err(Error::InsufficientSamples(
                "no samples in the first half of the horizon".into(),
            ));
        }
        let (ht, hv): (Vec<f64>, Vec<f64>) = half.into_iter().unzip();
        let half_series = TimeSeries::new("half", ht, hv)?;
        let w_full = weak_lorentz_time_norm(series, a)?;
        let w_half = weak_lorentz_time_norm(&half_series, a)?;
        let statistic = w_full / w_half;
        Ok(RapidDecayReport {
            branch: DecayBranch::Weak,
            statistic,
            passes: statistic <= 1.05,
        })
    } else {
        // Strictly above: trapezoid ∫ v^a dt with a convergent tail — the
        // last octave [T/2, T] must carry under 20% of the whole integral.
        let times = series.times();
        let values = series.values();
        let t_max = *times.last().unwrap();
        let mut total = 0.0;
        let mut tail = 0.0;
        for i in 1..times.len() {
            let seg = 0.5 * (values[i].powf(a) + values[i - 1].powf(a)) * (times[i] - times[i - 1]);
            total += seg;
            if times[i - 1] >= 0.5 * t_max {
                tail += seg;
            }
        }
        if total <= 0.0 {
            return Err(Error::InsufficientData("integral of the series vanishes".into()));
        }
        let statistic = tail / total;
        Ok(RapidDecayReport {
            branch: DecayBranch::Strong,
            statistic,
            passes: statistic < 0.2,
        })
    }
}

/// Decay-rate floor for solutions that do not scatter, against the free rate.
#[derive(Clone, Copy, Debug)]
pub struct LowerBoundReport {
    /// Non-scattering solutions decay in L^{α+2} no faster than t^{-bound}.
    pub rate_bound: f64,
    /// The rate a freely dispersing profile would show, for contrast.
    pub free_rate: f64,
    /// Fitted (exponent, r²) of the measured series.
    pub fitted: (f64, f64),
    /// Fitted exponent does not exceed the floor (within 5% slack).
    pub respects_bound: bool,
}

/// Compare a measured ‖u(t)‖_{α+2} series with the decay floor
/// 2(1-θ)/(α+2) that non-scattering solutions cannot beat; θ comes from the
/// exponent table except in d = 2, where the caller supplies it.
pub fn lower_bound_compare(
    series: &TimeSeries,
    table: &ExponentTable,
    theta_override: Option<f64>,
) -> Result<LowerBoundReport> {
    let theta = theta_override.or(table.theta).ok_or_else(|| {
        Error::InvalidArgument("the decay exponent θ must be supplied in dimension 2".into())
    })?;
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("θ must lie in [0, 1), got {theta}")));
    }
    let alpha = table.alpha;
    let rate_bound = 2.0 * (1.0 - theta) / (alpha + 2.0);
    let free_rate = table.alpha_d / (2.0 * (alpha + 2.0));
    let fitted = fit_decay_exponent(series, 0)?;
    let respects_bound = fitted.0 <= rate_bound * 1.05;
    Ok(LowerBoundReport { rate_bound, free_rate, fitted, respects_bound })
}

/// Everything needed to run and classify a scattering experiment.
#[derive(Clone, Debug)]
pub struct ClassifySetup {
    /// Largest ladder time T.
    pub horizon: f64,
    /// Ladder rungs T·2^{-j}.
    pub n_samples: usize,
    pub dt: f64,
    /// Verdict tolerance as a fraction of ‖u₀‖_Σ.
    pub tol_rel: f64,
    pub opts: EvolveOptions,
}

impl Default for ClassifySetup {
    fn default() -> Self {
        ClassifySetup {
            horizon: 16.0,
            n_samples: 8,
            dt: 1e-3,
            tol_rel: 1e-4,
            opts: EvolveOptions::default(),
        }
    }
}

/// Integrate u₀ over a dyadic ladder up to the horizon and classify the run.
pub fn run_classify(u0: &Field, p: &Params, setup: &ClassifySetup) -> Result<(Trajectory, RunReport)> {
    let ladder = geometric_ladder(setup.horizon, setup.n_samples)?;
    let mut opts = setup.opts;
    opts.store_fields = true;
    let traj = evolve_sampled(u0, 0.0, p, setup.dt, &ladder, &opts)?;
    let tol = setup.tol_rel * sigma_norm(u0).total;
    let report = classify_run(&traj, tol)?;
    Ok((traj, report))
}
