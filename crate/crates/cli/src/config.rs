//! Sectioned key=value config files: parsing with line-numbered errors,
//! strict unknown-key rejection, documented defaults, and validation that
//! names the offending key and its constraint.

use std::collections::BTreeSet;
use std::sync::Arc;

use nls_core::dynamics::{EvolveOptions, Params};
use nls_core::grid::{make_grid, Field, Grid};
use nls_core::initialdata::DataSpec;

use crate::csvio::fmt_f64;
use crate::error::CliError;

/// Which frame `simulate` integrates in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Physical time t, equation i u_t + Δu + λ|u|^α u = 0.
    Autonomous,
    /// Rescaled time s ∈ [0,1) in the lens-transformed companion frame;
    /// `t_end` and `dt` are then read as s_end and ds.
    Companion,
}

/// Initial-data family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Gaussian,
    Soliton,
    Oscillating,
}

/// Parameter a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    Lambda,
    Amplitude,
    Width,
    B,
    Scale,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Lambda => "lambda",
            SweepParam::Amplitude => "amplitude",
            SweepParam::Width => "width",
            SweepParam::B => "b",
            SweepParam::Scale => "scale",
        }
    }
}

/// Sweep lattice: one classify run per value of one parameter.
#[derive(Clone, Debug)]
pub struct SweepCfg {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

/// Fully resolved run configuration (defaults filled, everything validated).
#[derive(Clone, Debug)]
pub struct RunConfig {
    // [params]
    pub d: usize,
    pub alpha: f64,
    pub lambda: f64,
    // [grid]
    pub n: usize,
    pub half_length: f64,
    // [time]
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub mode: Mode,
    pub geometric_samples: usize,
    // [data]
    pub family: Family,
    pub amplitude: f64,
    pub width: f64,
    pub b: f64,
    pub scale: f64,
    pub seed: u64,
    // [tolerances]
    pub boundary: f64,
    pub blowup_factor: f64,
    pub cauchy_rel: f64,
    // [outputs]
    pub prefix: String,
    pub plot_script: bool,
    // [sweep]
    pub sweep: Option<SweepCfg>,
}

const SECTIONS: &[&str] = &["params", "grid", "time", "data", "tolerances", "outputs", "sweep"];

fn keys_of(section: &str) -> &'static [&'static str] {
    match section {
        "params" => &["d", "alpha", "lambda"],
        "grid" => &["n", "half_length"],
        "time" => &["t_end", "dt", "sample_every", "mode", "geometric_samples"],
        "data" => &["family", "amplitude", "width", "b", "scale", "seed"],
        "tolerances" => &["boundary", "blowup_factor", "cauchy_rel"],
        "outputs" => &["prefix", "plot_script"],
        "sweep" => &["parameter", "values"],
        _ => &[],
    }
}

struct RawEntry {
    line: usize,
    value: String,
}

/// Intermediate parse product: (section, key) → value, with duplicates and
/// unknown names already rejected.
struct RawConfig {
    entries: Vec<(String, String, RawEntry)>,
    sections_seen: BTreeSet<String>,
}

impl RawConfig {
    fn get(&self, section: &str, key: &str) -> Option<&RawEntry> {
        self.entries
            .iter()
            .find(|(s, k, _)| s == section && k == key)
            .map(|(_, _, e)| e)
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections_seen.contains(section)
    }
}

fn parse_raw(text: &str) -> Result<RawConfig, CliError> {
    let mut entries: Vec<(String, String, RawEntry)> = Vec::new();
    let mut sections_seen = BTreeSet::new();
    let mut section: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(stripped) = line.strip_prefix('[') {
            let name = stripped.strip_suffix(']').ok_or_else(|| {
                CliError::Config(format!("line {lineno}: malformed section header {line:?}"))
            })?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(CliError::Config(format!(
                    "line {lineno}: unknown section [{name}]; expected one of {}",
                    SECTIONS.iter().map(|s| format!("[{s}]")).collect::<Vec<_>>().join(", ")
                )));
            }
            sections_seen.insert(name.to_string());
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("line {lineno}: expected key = value, got {line:?}"))
        })?;
        let key = key.trim();
        let value = value.trim();
        let sec = section.clone().ok_or_else(|| {
            CliError::Config(format!("line {lineno}: key {key:?} appears before any [section]"))
        })?;
        if !keys_of(&sec).contains(&key) {
            return Err(CliError::Config(format!(
                "line {lineno}: unknown key {key:?} in [{sec}]; allowed: {}",
                keys_of(&sec).join(", ")
            )));
        }
        if entries.iter().any(|(s, k, _)| *s == sec && k == key) {
            return Err(CliError::Config(format!(
                "line {lineno}: duplicate key {key:?} in [{sec}]"
            )));
        }
        entries.push((sec, key.to_string(), RawEntry { line: lineno, value: value.to_string() }));
    }
    Ok(RawConfig { entries, sections_seen })
}

fn parse_f64(e: &RawEntry, key: &str) -> Result<f64, CliError> {
    e.value.parse::<f64>().map_err(|_| {
        CliError::Config(format!("line {}: {key} must be a number, got {:?}", e.line, e.value))
    })
}

fn parse_usize(e: &RawEntry, key: &str) -> Result<usize, CliError> {
    e.value.parse::<usize>().map_err(|_| {
        CliError::Config(format!(
            "line {}: {key} must be a non-negative integer, got {:?}",
            e.line, e.value
        ))
    })
}

fn parse_bool(e: &RawEntry, key: &str) -> Result<bool, CliError> {
    match e.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(CliError::Config(format!(
            "line {}: {key} must be true or false, got {other:?}",
            e.line
        ))),
    }
}

fn req(raw: &RawConfig, section: &str, key: &str) -> Result<(), CliError> {
    if raw.get(section, key).is_none() {
        return Err(CliError::Config(format!("missing required key {key:?} in [{section}]")));
    }
    Ok(())
}

macro_rules! opt_num {
    ($raw:expr, $sec:literal, $key:literal, $default:expr, $parse:ident) => {
        match $raw.get($sec, $key) {
            Some(e) => $parse(e, $key)?,
            None => $default,
        }
    };
}

/// Parse and validate a config document. Every absent optional key takes its
/// documented default; the result echoes them all via [`RunConfig::resolved_comment`].
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw = parse_raw(text)?;

    // Required keys.
    req(&raw, "params", "d")?;
    req(&raw, "params", "alpha")?;
    req(&raw, "params", "lambda")?;
    req(&raw, "data", "family")?;

    let d = parse_usize(raw.get("params", "d").unwrap(), "d")?;
    let alpha = parse_f64(raw.get("params", "alpha").unwrap(), "alpha")?;
    let lambda = parse_f64(raw.get("params", "lambda").unwrap(), "lambda")?;

    // Defaults chosen so the bare-minimum document passes the stability
    // guard: dt·k_max² = 1e-3·(π·512/40)² ≈ 1.62 < π.
    let n = opt_num!(raw, "grid", "n", 512, parse_usize);
    let half_length = opt_num!(raw, "grid", "half_length", 20.0, parse_f64);

    let t_end = opt_num!(raw, "time", "t_end", 40.0, parse_f64);
    let dt = opt_num!(raw, "time", "dt", 1e-3, parse_f64);
    let sample_every = opt_num!(raw, "time", "sample_every", 10, parse_usize);
    let geometric_samples = opt_num!(raw, "time", "geometric_samples", 8, parse_usize);
    let mode = match raw.get("time", "mode") {
        None => Mode::Autonomous,
        Some(e) => match e.value.as_str() {
            "autonomous" => Mode::Autonomous,
            "companion" => Mode::Companion,
            other => {
                return Err(CliError::Config(format!(
                    "line {}: mode must be autonomous or companion, got {other:?}",
                    e.line
                )))
            }
        },
    };

    let family = match raw.get("data", "family").unwrap().value.as_str() {
        "gaussian" => Family::Gaussian,
        "soliton" => Family::Soliton,
        "oscillating" => Family::Oscillating,
        other => {
            return Err(CliError::Config(format!(
                "line {}: family must be gaussian, soliton, or oscillating, got {other:?}",
                raw.get("data", "family").unwrap().line
            )))
        }
    };
    let amplitude = opt_num!(raw, "data", "amplitude", 1.0, parse_f64);
    let width = opt_num!(raw, "data", "width", 1.0, parse_f64);
    let b = opt_num!(raw, "data", "b", 0.0, parse_f64);
    let scale = opt_num!(raw, "data", "scale", 1.0, parse_f64);
    let seed = match raw.get("data", "seed") {
        Some(e) => e.value.parse::<u64>().map_err(|_| {
            CliError::Config(format!(
                "line {}: seed must be a non-negative integer, got {:?}",
                e.line, e.value
            ))
        })?,
        None => 0,
    };

    let boundary = opt_num!(raw, "tolerances", "boundary", 1e-6, parse_f64);
    let blowup_factor =
        opt_num!(raw, "tolerances", "blowup_factor", EvolveOptions::default().blowup_factor, parse_f64);
    let cauchy_rel = opt_num!(raw, "tolerances", "cauchy_rel", 1e-4, parse_f64);

    let prefix = match raw.get("outputs", "prefix") {
        Some(e) => e.value.clone(),
        None => "run".to_string(),
    };
    let plot_script = match raw.get("outputs", "plot_script") {
        Some(e) => parse_bool(e, "plot_script")?,
        None => true,
    };

    let sweep = if raw.has_section("sweep") {
        req(&raw, "sweep", "parameter")?;
        req(&raw, "sweep", "values")?;
        let pe = raw.get("sweep", "parameter").unwrap();
        let parameter = match pe.value.as_str() {
            "alpha" => SweepParam::Alpha,
            "lambda" => SweepParam::Lambda,
            "amplitude" => SweepParam::Amplitude,
            "width" => SweepParam::Width,
            "b" => SweepParam::B,
            "scale" => SweepParam::Scale,
            other => {
                return Err(CliError::Config(format!(
                    "line {}: parameter must be one of alpha, lambda, amplitude, width, b, scale; got {other:?}",
                    pe.line
                )))
            }
        };
        let ve = raw.get("sweep", "values").unwrap();
        let mut values = Vec::new();
        for part in ve.value.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            values.push(part.parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "line {}: values must be comma-separated numbers, got {part:?}",
                    ve.line
                ))
            })?);
        }
        if values.is_empty() {
            return Err(CliError::Config(format!("line {}: values must be non-empty", ve.line)));
        }
        Some(SweepCfg { parameter, values })
    } else {
        None
    };

    let cfg = RunConfig {
        d,
        alpha,
        lambda,
        n,
        half_length,
        t_end,
        dt,
        sample_every,
        mode,
        geometric_samples,
        family,
        amplitude,
        width,
        b,
        scale,
        seed,
        boundary,
        blowup_factor,
        cauchy_rel,
        prefix,
        plot_script,
        sweep,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn check(ok: bool, key: &str, constraint: &str, got: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{key} must satisfy {constraint} (got {got})")))
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        check((1..=3).contains(&self.d), "d", "d in {1, 2, 3}", self.d)?;
        check(self.alpha.is_finite() && self.alpha > 0.0, "alpha", "alpha > 0", self.alpha)?;
        check(
            self.lambda.is_finite() && self.lambda != 0.0,
            "lambda",
            "lambda finite and nonzero",
            self.lambda,
        )?;
        check(
            self.n >= 8 && self.n.is_power_of_two(),
            "n",
            "a power of two with n >= 8",
            self.n,
        )?;
        check(
            self.half_length.is_finite() && self.half_length > 0.0,
            "half_length",
            "half_length > 0",
            self.half_length,
        )?;
        check(self.t_end.is_finite() && self.t_end > 0.0, "t_end", "t_end > 0", self.t_end)?;
        if self.mode == Mode::Companion {
            check(self.t_end < 1.0, "t_end", "t_end < 1 in companion mode (it is s_end)", self.t_end)?;
        }
        check(self.dt.is_finite() && self.dt > 0.0, "dt", "dt > 0", self.dt)?;
        check(self.sample_every >= 1, "sample_every", "sample_every >= 1", self.sample_every)?;
        check(
            self.geometric_samples >= 2,
            "geometric_samples",
            "geometric_samples >= 2",
            self.geometric_samples,
        )?;
        check(self.amplitude.is_finite(), "amplitude", "a finite number", self.amplitude)?;
        check(self.width.is_finite() && self.width > 0.0, "width", "width > 0", self.width)?;
        check(self.b.is_finite(), "b", "a finite number", self.b)?;
        check(self.scale.is_finite(), "scale", "a finite number", self.scale)?;
        check(
            self.boundary.is_finite() && self.boundary > 0.0,
            "boundary",
            "boundary > 0",
            self.boundary,
        )?;
        check(
            self.blowup_factor.is_finite() && self.blowup_factor > 1.0,
            "blowup_factor",
            "blowup_factor > 1",
            self.blowup_factor,
        )?;
        check(
            self.cauchy_rel.is_finite() && self.cauchy_rel > 0.0,
            "cauchy_rel",
            "cauchy_rel > 0",
            self.cauchy_rel,
        )?;
        check(
            !self.prefix.is_empty() && !self.prefix.contains(['/', '\\']),
            "prefix",
            "non-empty, without path separators",
            format!("{:?}", self.prefix),
        )?;
        if self.family == Family::Soliton {
            check(self.d == 1, "family", "soliton data exists in d = 1 only", self.d)?;
        }
        if let Some(sweep) = &self.sweep {
            for v in &sweep.values {
                check(v.is_finite(), "values", "all sweep values finite", v)?;
            }
            if sweep.parameter == SweepParam::B {
                check(
                    self.family == Family::Oscillating,
                    "parameter",
                    "sweeping b requires family = oscillating",
                    "other family",
                )?;
            }
            if sweep.parameter == SweepParam::Scale {
                check(
                    self.family == Family::Soliton,
                    "parameter",
                    "sweeping scale requires family = soliton",
                    "other family",
                )?;
            }
        }
        Ok(())
    }

    /// A copy with one swept parameter replaced (revalidated).
    pub fn with_swept(&self, parameter: SweepParam, value: f64) -> Result<RunConfig, CliError> {
        let mut cfg = self.clone();
        match parameter {
            SweepParam::Alpha => cfg.alpha = value,
            SweepParam::Lambda => cfg.lambda = value,
            SweepParam::Amplitude => cfg.amplitude = value,
            SweepParam::Width => cfg.width = value,
            SweepParam::B => cfg.b = value,
            SweepParam::Scale => cfg.scale = value,
        }
        cfg.prefix = format!("{}_{}_{}", self.prefix, parameter.key(), fmt_f64(value));
        cfg.sweep = None;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<Params, CliError> {
        Ok(Params::new(self.d, self.alpha, self.lambda)?)
    }

    pub fn grid(&self) -> Result<Arc<Grid>, CliError> {
        Ok(make_grid(self.d, self.n, self.half_length)?)
    }

    pub fn dataspec(&self) -> DataSpec {
        match self.family {
            Family::Gaussian => DataSpec::Gaussian { amplitude: self.amplitude, width: self.width },
            Family::Soliton => DataSpec::Soliton { scale: self.scale },
            Family::Oscillating => DataSpec::Oscillating {
                b: self.b,
                base: Box::new(DataSpec::Gaussian {
                    amplitude: self.amplitude,
                    width: self.width,
                }),
            },
        }
    }

    pub fn initial_field(&self, grid: &Arc<Grid>) -> Result<Field, CliError> {
        Ok(self.dataspec().realize(grid, self.alpha)?)
    }

    pub fn evolve_options(&self, store_fields: bool) -> EvolveOptions {
        let mut opts = EvolveOptions::default();
        opts.boundary_tol = self.boundary;
        opts.blowup_factor = self.blowup_factor;
        opts.store_fields = store_fields;
        opts
    }

    /// Refuse time steps that under-resolve the fastest retained phase:
    /// dt·k_max² must stay at or below π.
    pub fn stability_guard(&self) -> Result<(), CliError> {
        let k_max = std::f64::consts::PI * self.n as f64 / (2.0 * self.half_length);
        let phase = self.dt * k_max * k_max;
        if phase > std::f64::consts::PI {
            return Err(CliError::Config(format!(
                "stability: dt·k_max² = {phase:.6} exceeds π; refuse to step \
                 (reduce dt below {:.3e} or coarsen the grid)",
                std::f64::consts::PI / (k_max * k_max)
            )));
        }
        Ok(())
    }

    /// `#`-prefixed comment block echoing every resolved field, written at
    /// the top of each emitted file for reproducibility.
    pub fn resolved_comment(&self) -> String {
        let mut s = String::new();
        s.push_str("# resolved configuration\n");
        s.push_str("# [params]\n");
        s.push_str(&format!("# d = {}\n", self.d));
        s.push_str(&format!("# alpha = {}\n", fmt_f64(self.alpha)));
        s.push_str(&format!("# lambda = {}\n", fmt_f64(self.lambda)));
        s.push_str("# [grid]\n");
        s.push_str(&format!("# n = {}\n", self.n));
        s.push_str(&format!("# half_length = {}\n", fmt_f64(self.half_length)));
        s.push_str("# [time]\n");
        s.push_str(&format!("# t_end = {}\n", fmt_f64(self.t_end)));
        s.push_str(&format!("# dt = {}\n", fmt_f64(self.dt)));
        s.push_str(&format!("# sample_every = {}\n", self.sample_every));
        s.push_str(&format!(
            "# mode = {}\n",
            match self.mode {
                Mode::Autonomous => "autonomous",
                Mode::Companion => "companion",
            }
        ));
        s.push_str(&format!("# geometric_samples = {}\n", self.geometric_samples));
        s.push_str("# [data]\n");
        s.push_str(&format!(
            "# family = {}\n",
            match self.family {
                Family::Gaussian => "gaussian",
                Family::Soliton => "soliton",
                Family::Oscillating => "oscillating",
            }
        ));
        s.push_str(&format!("# amplitude = {}\n", fmt_f64(self.amplitude)));
        s.push_str(&format!("# width = {}\n", fmt_f64(self.width)));
        s.push_str(&format!("# b = {}\n", fmt_f64(self.b)));
        s.push_str(&format!("# scale = {}\n", fmt_f64(self.scale)));
        s.push_str(&format!("# seed = {}\n", self.seed));
        s.push_str("# [tolerances]\n");
        s.push_str(&format!("# boundary = {}\n", fmt_f64(self.boundary)));
        s.push_str(&format!("# blowup_factor = {}\n", fmt_f64(self.blowup_factor)));
        s.push_str(&format!("# cauchy_rel = {}\n", fmt_f64(self.cauchy_rel)));
        s.push_str("# [outputs]\n");
        s.push_str(&format!("# prefix = {}\n", self.prefix));
        s.push_str(&format!("# plot_script = {}\n", self.plot_script));
        if let Some(sweep) = &self.sweep {
            s.push_str("# [sweep]\n");
            s.push_str(&format!("# parameter = {}\n", sweep.parameter.key()));
            s.push_str(&format!(
                "# values = {}\n",
                sweep.values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(", ")
            ));
        }
        s
    }
}
