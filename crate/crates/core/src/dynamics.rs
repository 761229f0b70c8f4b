//! Time integration of i u_t + Δu + λ|u|^α u = 0 by Strang-split spectral
//! stepping, in two frames: the equation itself ("autonomous") and its
//! lens-transformed companion on rescaled time s ∈ [0,1), where the coupling
//! carries the explicit factor (1-s)^{(αd-4)/2} ("nonautonomous").

use crate::error::Error;
use crate::grid::{free_propagate, grad_norm_sq, Field};
use crate::observables::{self, ObservableRow};
use crate::{exec, pcx, Result, C64};

/// Equation parameters: dimension d, nonlinearity power α, coupling λ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    d: usize,
    alpha: f64,
    lambda: f64,
}

impl Params {
    pub fn new(d: usize, alpha: f64, lambda: f64) -> Result<Params> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParams(format!("dimension {d} not in 1..=3")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "nonlinearity power must be positive and finite, got {alpha}"
            )));
        }
        if !(lambda.is_finite() && lambda != 0.0) {
            return Err(Error::InvalidParams(format!(
                "coupling must be nonzero and finite, got {lambda}"
            )));
        }
        Ok(Params { d, alpha, lambda })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// α·d (decides the scaling-critical character of the coupling).
    pub fn alpha_d(&self) -> f64 {
        self.alpha * self.d as f64
    }

    /// True when α·d = 4, the pseudo-conformally invariant case.
    pub fn is_mass_critical(&self) -> bool {
        (self.alpha_d() - 4.0).abs() < 1e-12
    }
}

/// Which frame a run integrates in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    /// i u_t + Δu + λ|u|^α u = 0 on physical time.
    Autonomous,
    /// i v_s + Δv + λ(1-s)^{(αd-4)/2}|v|^α v = 0 on s ∈ [0,1).
    Nonautonomous,
}

/// Controls for divergence detection and sample storage.
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    /// A sample is domain-valid while the boundary shell (per-axis |x| beyond
    /// 0.9·L) holds at most this fraction of the mass.
    pub boundary_tol: f64,
    /// Declare blow-up when ‖∇u‖ exceeds this multiple of its initial value.
    /// Must stay reachable below the grid's gradient ceiling ~k_max·‖u‖₂,
    /// or collapse aliases and bounces before it can be flagged.
    pub blowup_factor: f64,
    /// Steps between divergence checks.
    pub check_every: usize,
    /// Keep the full field at each sample (memory-heavy for dense sampling).
    pub store_fields: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            boundary_tol: 1e-6,
            blowup_factor: 25.0,
            check_every: 16,
            store_fields: true,
        }
    }
}

/// One recorded instant of a run.
#[derive(Clone, Debug)]
pub struct Sample {
    pub t: f64,
    /// Present when the run stored fields.
    pub field: Option<Field>,
    pub row: ObservableRow,
    /// Frame energies (E₁, E₂) for nonautonomous runs.
    pub pcx_energies: Option<(f64, f64)>,
}

/// A completed (or halted) run with its recorded samples.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: Params,
    pub mode: StepMode,
    pub samples: Vec<Sample>,
    pub diverged: bool,
    pub diverged_at: Option<f64>,
    /// False once any sample put more than `boundary_tol` of the mass in the
    /// boundary shell: the box stopped representing the whole space.
    pub domain_valid: bool,
}

impl Trajectory {
    pub fn last_time(&self) -> Option<f64> {
        self.samples.last().map(|s| s.t)
    }

    pub fn last_field(&self) -> Option<&Field> {
        self.samples.last().and_then(|s| s.field.as_ref())
    }
}

/// Advance the nonlinear sub-flow i u_t = -λ·w·|u|^α u exactly:
/// u ← u·exp(i·λ·w·|u|^α·dt). The modulus is pointwise invariant.
pub fn nonlinear_phase_step(f: &mut Field, dt: f64, p: &Params, weight: f64) {
    let coef = p.lambda * weight * dt;
    let alpha = p.alpha;
    // round integer halves of α get a multiplication-only modulus power
    let half_pow = alpha / 2.0;
    let as_int = half_pow.round();
    let use_powi = (half_pow - as_int).abs() < 1e-14 && as_int >= 1.0 && as_int <= 8.0;
    if use_powi {
        let e = as_int as i32;
        exec::map_indexed(f.values_mut(), |_, v| {
            let (s, c) = (coef * v.norm_sqr().powi(e)).sin_cos();
            v * C64::new(c, s)
        });
    } else {
        exec::map_indexed(f.values_mut(), |_, v| {
            let (s, c) = (coef * v.norm_sqr().powf(half_pow)).sin_cos();
            v * C64::new(c, s)
        });
    }
}

/// Step-averaged coupling weight of the nonautonomous frame,
/// (1/ds)∫_s^{s+ds}(1-σ)^q dσ with q = (αd-4)/2, in closed form.
pub fn pcx_weight(p: &Params, s: f64, ds: f64) -> f64 {
    let q = 0.5 * (p.alpha_d() - 4.0);
    let a = 1.0 - s;
    let b = 1.0 - s - ds;
    if (q + 1.0).abs() < 1e-12 {
        // ∫(1-σ)^{-1} dσ = ln((1-s)/(1-s-ds))
        (a / b).ln() / ds
    } else {
        (a.powf(q + 1.0) - b.powf(q + 1.0)) / ((q + 1.0) * ds)
    }
}

/// One Strang step: half kinetic, exact nonlinear phase, half kinetic.
/// Second-order accurate in dt; exactly mass-conserving.
pub fn strang_step(f: &Field, t: f64, dt: f64, p: &Params, mode: StepMode) -> Field {
    let mut mid = free_propagate(f, 0.5 * dt);
    let weight = match mode {
        StepMode::Autonomous => 1.0,
        StepMode::Nonautonomous => pcx_weight(p, t, dt),
    };
    nonlinear_phase_step(&mut mid, dt, p, weight);
    free_propagate(&mid, 0.5 * dt)
}

/// Integrate from t0 to t0 + n·dt with n = round((t1-t0)/dt), recording every
/// `sample_every`-th step (and always the first and last).
pub fn evolve(
    u0: &Field,
    t0: f64,
    t1: f64,
    dt: f64,
    p: &Params,
    sample_every: usize,
) -> Result<Trajectory> {
    evolve_with(u0, t0, t1, dt, p, sample_every, &EvolveOptions::default(), StepMode::Autonomous)
}

/// Nonautonomous-frame run on s ∈ [s0, s1] ⊂ [0, 1).
pub fn evolve_nonautonomous(
    v0: &Field,
    s0: f64,
    s1: f64,
    ds: f64,
    p: &Params,
    sample_every: usize,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(0.0..1.0).contains(&s0) || !(s1 > s0 && s1 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rescaled time must satisfy 0 ≤ s0 < s1 < 1, got [{s0}, {s1}]"
        )));
    }
    evolve_with(v0, s0, s1, ds, p, sample_every, opts, StepMode::Nonautonomous)
}

/// Full-control integration loop.
#[allow(clippy::too_many_arguments)]
pub fn evolve_with(
    u0: &Field,
    t0: f64,
    t1: f64,
    dt: f64,
    p: &Params,
    sample_every: usize,
    opts: &EvolveOptions,
    mode: StepMode,
) -> Result<Trajectory> {
    let n_steps = step_count(t0, t1, dt)?;
    let sample_steps: Vec<usize> = {
        let every = sample_every.max(1);
        let mut s: Vec<usize> = (0..=n_steps).step_by(every).collect();
        if *s.last().unwrap() != n_steps {
            s.push(n_steps);
        }
        s
    };
    run_loop(u0, t0, dt, p, &sample_steps, opts, mode)
}

/// Integrate with samples at the steps nearest the requested times.
/// Times must be strictly increasing and at least t0.
pub fn evolve_sampled(
    u0: &Field,
    t0: f64,
    p: &Params,
    dt: f64,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no sample times requested".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    let mut steps = Vec::with_capacity(times.len() + 1);
    steps.push(0usize);
    for &t in times {
        if !t.is_finite() || t < t0 {
            return Err(Error::InvalidArgument(format!(
                "sample time {t} precedes start {t0}"
            )));
        }
        let idx = ((t - t0) / dt).round() as usize;
        if idx != *steps.last().unwrap() {
            steps.push(idx);
        }
    }
    if steps.len() < 2 {
        return Err(Error::InvalidArgument(
            "requested times all round to the start step".into(),
        ));
    }
    for w in steps.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument("sample times must be increasing".into()));
        }
    }
    run_loop(u0, t0, dt, p, &steps, opts, StepMode::Autonomous)
}

fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidArgument(format!(
            "need a finite forward interval, got [{t0}, {t1}]"
        )));
    }
    let n = ((t1 - t0) / dt).round();
    if n < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "interval [{t0}, {t1}] is shorter than half a step {dt}"
        )));
    }
    if n > 5e8 {
        return Err(Error::InvalidArgument(format!("{n} steps is beyond supported range")));
    }
    Ok(n as usize)
}

fn record(
    state: &Field,
    t: f64,
    p: &Params,
    opts: &EvolveOptions,
    mode: StepMode,
) -> Sample {
    let row = observables::row(state, t, p, opts.boundary_tol);
    let pcx_energies = match mode {
        StepMode::Autonomous => None,
        StepMode::Nonautonomous => Some(pcx::pcx_energies(state, t, p)),
    };
    Sample {
        t,
        field: opts.store_fields.then(|| state.clone()),
        row,
        pcx_energies,
    }
}

fn run_loop(
    u0: &Field,
    t0: f64,
    dt: f64,
    p: &Params,
    sample_steps: &[usize],
    opts: &EvolveOptions,
    mode: StepMode,
) -> Result<Trajectory> {
    if u0.grid().d() != p.d() {
        return Err(Error::InvalidArgument(format!(
            "field dimension {} does not match parameter dimension {}",
            u0.grid().d(),
            p.d()
        )));
    }
    if !u0.is_finite() {
        return Err(Error::InvalidArgument("initial data is not finite".into()));
    }
    let n_steps = *sample_steps.last().unwrap();
    let check_every = opts.check_every.max(1);
    let grad_floor = grad_norm_sq(u0).max(1e-300);
    let blowup_grad = opts.blowup_factor * opts.blowup_factor * grad_floor;

    let mut samples = Vec::with_capacity(sample_steps.len());
    let mut next_sample = 0usize;
    let mut diverged = false;
    let mut diverged_at = None;
    let mut domain_valid = true;

    let mut state = u0.clone();
    if sample_steps[next_sample] == 0 {
        let s = record(&state, t0, p, opts, mode);
        domain_valid &= s.row.valid;
        samples.push(s);
        next_sample += 1;
    }

    for step in 1..=n_steps {
        let t_before = t0 + (step - 1) as f64 * dt;
        state = strang_step(&state, t_before, dt, p, mode);
        let t_now = t0 + step as f64 * dt;

        if step % check_every == 0 || step == n_steps {
            if !state.is_finite() || grad_norm_sq(&state) > blowup_grad {
                diverged = true;
                diverged_at = Some(t_now);
                state.set_diverged(true);
                break;
            }
        }

        if next_sample < sample_steps.len() && sample_steps[next_sample] == step {
            let s = record(&state, t_now, p, opts, mode);
            domain_valid &= s.row.valid;
            samples.push(s);
            next_sample += 1;
        }
    }

    Ok(Trajectory {
        params: *p,
        mode,
        samples,
        diverged,
        diverged_at,
        domain_valid,
    })
}
