//! Experiment execution: the four commands behind the `nls` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use nls_core::dynamics::{evolve_nonautonomous, evolve_with, StepMode};
use nls_core::groundstate::{from_closed_form_1d, petviashvili, GroundState, PetviashviliOptions};
use nls_core::grid::{make_grid, Grid};
use nls_core::pcx::to_pcx;
use nls_core::scattering::{run_classify, ClassifySetup, RunReport, Verdict};
use nls_core::thresholds::{classify_field, Strictness, ThresholdVerdict};

use crate::config::{parse_config, Mode, RunConfig};
use crate::csvio::{
    fmt_f64, traj_rows, write_profile_csv, write_report_csv, write_series_csv,
    write_trajectory_csv,
};
use crate::error::CliError;
use crate::plot;

/// The four experiment commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Groundstate,
    Classify,
    Sweep,
}

/// One resolved CLI invocation.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub cmd: Command,
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub verbose: bool,
}

/// Load the config, run the command, and emit its artifacts.
pub fn execute(inv: &Invocation) -> Result<(), CliError> {
    let text = fs::read_to_string(&inv.config_path)
        .map_err(|e| CliError::io(&inv.config_path, e))?;
    let cfg = parse_config(&text)?;
    fs::create_dir_all(&inv.out_dir).map_err(|e| CliError::io(&inv.out_dir, e))?;
    if inv.verbose {
        print!("{}", cfg.resolved_comment());
    }
    match inv.cmd {
        Command::Simulate => simulate_cmd(&cfg, &inv.out_dir),
        Command::Groundstate => groundstate_cmd(&cfg, &inv.out_dir),
        Command::Classify => classify_cmd(&cfg, &inv.out_dir),
        Command::Sweep => sweep_cmd(&cfg, &inv.out_dir, inv.workers),
    }
}

fn out_path(out: &Path, prefix: &str, suffix: &str) -> PathBuf {
    out.join(format!("{prefix}_{suffix}"))
}

fn simulate_cmd(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    cfg.stability_guard()?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let u0 = cfg.initial_field(&grid)?;
    let opts = cfg.evolve_options(false);

    let traj = match cfg.mode {
        Mode::Autonomous => evolve_with(
            &u0,
            0.0,
            cfg.t_end,
            cfg.dt,
            &params,
            cfg.sample_every,
            &opts,
            StepMode::Autonomous,
        )?,
        Mode::Companion => {
            let pair = to_pcx(&u0, 0.0)?;
            evolve_nonautonomous(&pair.v, 0.0, cfg.t_end, cfg.dt, &params, cfg.sample_every, &opts)?
        }
    };

    let comment = cfg.resolved_comment();
    let rows = traj_rows(&traj);
    let series_path = out_path(out, &cfg.prefix, "series.csv");
    write_trajectory_csv(&series_path, &comment, &rows)?;
    if cfg.plot_script {
        let script = plot::simulate_script(&comment, &cfg.prefix, cfg.mode == Mode::Companion);
        let p = out_path(out, &cfg.prefix, "plots.gp");
        fs::write(&p, script).map_err(|e| CliError::io(&p, e))?;
    }

    if traj.diverged {
        return Err(CliError::Divergence(format!(
            "gradient blow-up detected at t = {} (artifacts in {})",
            traj.diverged_at.map(fmt_f64).unwrap_or_default(),
            series_path.display(),
        )));
    }
    if !traj.domain_valid {
        return Err(CliError::Domain(format!(
            "boundary mass fraction exceeded {} during the run (artifacts in {})",
            fmt_f64(cfg.boundary),
            series_path.display(),
        )));
    }
    let t_last = traj.samples.last().map(|s| s.t).unwrap_or(0.0);
    println!(
        "simulate: ok, {} samples to t = {}, wrote {}",
        rows.len(),
        fmt_f64(t_last),
        series_path.display()
    );
    Ok(())
}

fn groundstate_cmd(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let grid = cfg.grid()?;
    let gs = petviashvili(&grid, cfg.alpha, PetviashviliOptions::default())?;
    let comment = cfg.resolved_comment();

    let profile_path = out_path(out, &cfg.prefix, "profile.csv");
    write_profile_csv(&profile_path, &comment, gs.field())?;

    let (p1, p2) = gs.pohozaev_residuals();
    let columns = [
        "d",
        "alpha",
        "n",
        "half_length",
        "mass",
        "grad_l2_sq",
        "potential_pow",
        "energy_focusing",
        "residual",
        "iterations",
        "pohozaev_mass_grad",
        "pohozaev_mass_pot",
        "gn_constant",
    ];
    let values = vec![
        cfg.d.to_string(),
        fmt_f64(cfg.alpha),
        cfg.n.to_string(),
        fmt_f64(cfg.half_length),
        fmt_f64(gs.mass()),
        fmt_f64(gs.grad_norm_sq()),
        fmt_f64(gs.potential_pow()),
        fmt_f64(gs.energy_focusing()),
        fmt_f64(gs.residual()),
        gs.iterations().to_string(),
        fmt_f64(p1),
        fmt_f64(p2),
        fmt_f64(gs.gn_constant()),
    ];
    let report_path = out_path(out, &cfg.prefix, "groundstate.csv");
    write_report_csv(&report_path, &comment, &columns, &values)?;

    if cfg.plot_script {
        let script = plot::groundstate_script(&comment, &cfg.prefix, cfg.d, cfg.n);
        let p = out_path(out, &cfg.prefix, "plots.gp");
        fs::write(&p, script).map_err(|e| CliError::io(&p, e))?;
    }

    println!("groundstate: d = {}, alpha = {}, n = {}", cfg.d, cfg.alpha, cfg.n);
    println!(
        "  mass = {:.12}, grad_l2_sq = {:.12}, potential = {:.12}",
        gs.mass(),
        gs.grad_norm_sq(),
        gs.potential_pow()
    );
    println!(
        "  energy (focusing, unit coupling) = {:.12}, residual = {:.3e} after {} iterations",
        gs.energy_focusing(),
        gs.residual(),
        gs.iterations()
    );
    println!("  pohozaev residuals = ({p1:.3e}, {p2:.3e}), gn_constant = {:.12}", gs.gn_constant());
    println!("  wrote {} and {}", profile_path.display(), report_path.display());
    Ok(())
}

/// Reference ground state for threshold comparison: the sampled closed form
/// in d = 1, a fixed-point solve on a dedicated reference grid otherwise.
fn reference_state(cfg: &RunConfig, run_grid: &Arc<Grid>) -> Result<GroundState, CliError> {
    let gs = match cfg.d {
        1 => from_closed_form_1d(run_grid, cfg.alpha)?,
        2 => petviashvili(&make_grid(2, 256, 14.0)?, cfg.alpha, PetviashviliOptions::default())?,
        _ => petviashvili(&make_grid(3, 64, 10.0)?, cfg.alpha, PetviashviliOptions::default())?,
    };
    Ok(gs)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Scattered => "scattered",
        Verdict::NonScattering => "non_scattering",
        Verdict::BlowupDetected => "blowup",
        Verdict::Inconclusive => "inconclusive",
    }
}

struct ClassifyOutcome {
    report: RunReport,
    threshold: Option<ThresholdVerdict>,
    threshold_note: Option<String>,
}

/// Run one classify experiment and write its artifacts; exit-code semantics
/// are the caller's business.
fn classify_and_emit(cfg: &RunConfig, out: &Path) -> Result<ClassifyOutcome, CliError> {
    cfg.stability_guard()?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let u0 = cfg.initial_field(&grid)?;

    // Threshold comparison (focusing, mass-critical or harder only).
    let (threshold, threshold_note) = if cfg.lambda > 0.0
        && cfg.alpha + 1e-9 >= 4.0 / cfg.d as f64
        && (cfg.d as f64 - 2.0) * cfg.alpha < 4.0
    {
        match reference_state(cfg, &grid).and_then(|q| Ok(classify_field(&u0, &q, &params)?)) {
            Ok(v) => (Some(v), None),
            Err(CliError::Config(msg)) => (None, Some(msg)),
            Err(other) => return Err(other),
        }
    } else {
        (None, Some("threshold comparison applies to focusing runs at or above the critical coupling".into()))
    };

    let setup = ClassifySetup {
        horizon: cfg.t_end,
        n_samples: cfg.geometric_samples,
        dt: cfg.dt,
        tol_rel: cfg.cauchy_rel,
        opts: cfg.evolve_options(true),
    };
    let (_traj, report) = run_classify(&u0, &params, &setup)?;

    let comment = cfg.resolved_comment();
    let columns = [
        "verdict",
        "tol",
        "final_increment",
        "decay_exponent",
        "decay_r2",
        "domain_valid",
        "eta0",
        "admits_scattering_claim",
    ];
    let values = vec![
        verdict_str(report.verdict).to_string(),
        fmt_f64(report.tol),
        report.final_increment.map(fmt_f64).unwrap_or_default(),
        report.decay_fit.map(|(p, _)| fmt_f64(p)).unwrap_or_default(),
        report.decay_fit.map(|(_, r2)| fmt_f64(r2)).unwrap_or_default(),
        report.domain_valid.to_string(),
        threshold.as_ref().map(|t| fmt_f64(t.eta0)).unwrap_or_default(),
        threshold
            .as_ref()
            .map(|t| t.admits_scattering_claim.to_string())
            .unwrap_or_default(),
    ];
    write_report_csv(&out_path(out, &cfg.prefix, "report.csv"), &comment, &columns, &values)?;

    if let Some(cauchy) = &report.cauchy {
        write_series_csv(
            &out_path(out, &cfg.prefix, "cauchy.csv"),
            &comment,
            cauchy,
            "sigma_increment",
        )?;
        if cfg.plot_script {
            let p = out_path(out, &cfg.prefix, "plots.gp");
            fs::write(&p, plot::classify_script(&comment, &cfg.prefix))
                .map_err(|e| CliError::io(&p, e))?;
        }
    }
    if let Some(state) = &report.scattering_state {
        write_profile_csv(&out_path(out, &cfg.prefix, "scattering_state.csv"), &comment, state)?;
    }

    Ok(ClassifyOutcome { report, threshold, threshold_note })
}

fn print_classify_summary(cfg: &RunConfig, o: &ClassifyOutcome) {
    let r = &o.report;
    println!("classify [{}]: verdict = {}", cfg.prefix, verdict_str(r.verdict));
    println!(
        "  sigma tolerance = {:.6e} (cauchy_rel = {} x ||u0||)",
        r.tol,
        fmt_f64(cfg.cauchy_rel)
    );
    if let Some(inc) = r.final_increment {
        println!("  final increment = {inc:.6e}");
    }
    if let Some((p, r2)) = r.decay_fit {
        println!("  fitted decay: ||u(t)|| ~ t^-{p:.4} (r^2 = {r2:.4})");
    }
    if !r.domain_valid {
        println!("  warning: boundary mass exceeded the domain-validity tolerance");
    }
    match (&o.threshold, &o.threshold_note) {
        (Some(t), _) => {
            let s = |x: Strictness| match x {
                Strictness::StrictlyBelow => "strictly below",
                Strictness::Boundary => "on the boundary of",
                Strictness::Above => "above",
            };
            println!(
                "  threshold: eta0 = {:.6}, {} the mass-energy threshold, {} the gradient threshold",
                t.eta0,
                s(t.below_mass_energy),
                s(t.below_mass_gradient)
            );
            println!("  admits scattering claim: {}", t.admits_scattering_claim);
        }
        (None, Some(note)) => println!("  threshold: {note}"),
        (None, None) => {}
    }
}

fn classify_cmd(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let outcome = classify_and_emit(cfg, out)?;
    print_classify_summary(cfg, &outcome);
    if !outcome.report.domain_valid && outcome.report.verdict != Verdict::BlowupDetected {
        return Err(CliError::Domain(
            "boundary mass exceeded the tolerance; the verdict is untrustworthy".into(),
        ));
    }
    Ok(())
}

fn sweep_cmd(cfg: &RunConfig, out: &Path, workers: usize) -> Result<(), CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep requires a [sweep] section".into()))?;
    cfg.stability_guard()?;

    let derived: Vec<RunConfig> = sweep
        .values
        .iter()
        .map(|&v| cfg.with_swept(sweep.parameter, v))
        .collect::<Result<_, _>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<ClassifyOutcome> = pool.install(|| {
        derived
            .par_iter()
            .map(|c| classify_and_emit(c, out))
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let comment = cfg.resolved_comment();
    let mut text = comment.clone();
    text.push_str("parameter,value,verdict,tol,final_increment,decay_exponent,domain_valid\n");
    for (v, o) in sweep.values.iter().zip(&outcomes) {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sweep.parameter.key(),
            fmt_f64(*v),
            verdict_str(o.report.verdict),
            fmt_f64(o.report.tol),
            o.report.final_increment.map(fmt_f64).unwrap_or_default(),
            o.report.decay_fit.map(|(p, _)| fmt_f64(p)).unwrap_or_default(),
            o.report.domain_valid,
        ));
    }
    let sweep_path = out_path(out, &cfg.prefix, "sweep.csv");
    fs::write(&sweep_path, &text).map_err(|e| CliError::io(&sweep_path, e))?;

    for (cfg_i, o) in derived.iter().zip(&outcomes) {
        print_classify_summary(cfg_i, o);
    }
    println!("sweep: {} runs, wrote {}", outcomes.len(), sweep_path.display());
    Ok(())
}
