//! CSV emission and parsing: comma separator, '.' decimal point, LF line
//! endings, '#'-prefixed comment header lines, and full round-trip decimal
//! precision for every number.

use std::fs;
use std::path::Path;

use nls_core::dynamics::Trajectory;
use nls_core::grid::Field;
use nls_core::observables::TimeSeries;

use crate::error::CliError;

/// Exact column set of a trajectory CSV.
pub const TRAJ_HEADER: &str =
    "t,mass,energy,grad_l2_sq,l_alpha2,variance,pt_norm_sq,n_monitor,e1,e2,boundary_fraction";

/// Shortest decimal representation that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// One trajectory CSV row; e1/e2 are present for companion-frame runs only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub grad_l2_sq: f64,
    pub l_alpha2: f64,
    pub variance: f64,
    pub pt_norm_sq: f64,
    pub n_monitor: f64,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub boundary_fraction: f64,
}

/// Flatten a run's samples into CSV rows.
pub fn traj_rows(traj: &Trajectory) -> Vec<TrajRow> {
    traj.samples
        .iter()
        .map(|s| TrajRow {
            t: s.t,
            mass: s.row.mass,
            energy: s.row.energy,
            grad_l2_sq: s.row.grad_l2_sq,
            l_alpha2: s.row.l_alpha2,
            variance: s.row.variance,
            pt_norm_sq: s.row.pt_norm_sq,
            n_monitor: s.row.n_monitor,
            e1: s.pcx_energies.map(|(e1, _)| e1),
            e2: s.pcx_energies.map(|(_, e2)| e2),
            boundary_fraction: s.row.boundary_fraction,
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Render rows under the comment block and exact header.
pub fn render_trajectory_csv(comment: &str, rows: &[TrajRow]) -> String {
    let mut s = String::with_capacity(128 * (rows.len() + 2));
    s.push_str(comment);
    s.push_str(TRAJ_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.t),
            fmt_f64(r.mass),
            fmt_f64(r.energy),
            fmt_f64(r.grad_l2_sq),
            fmt_f64(r.l_alpha2),
            fmt_f64(r.variance),
            fmt_f64(r.pt_norm_sq),
            fmt_f64(r.n_monitor),
            fmt_opt(r.e1),
            fmt_opt(r.e2),
            fmt_f64(r.boundary_fraction),
        ));
    }
    s
}

pub fn write_trajectory_csv(path: &Path, comment: &str, rows: &[TrajRow]) -> Result<(), CliError> {
    write_text(path, &render_trajectory_csv(comment, rows))
}

fn parse_field(s: &str, line: usize) -> Result<f64, CliError> {
    s.parse::<f64>()
        .map_err(|_| CliError::Config(format!("csv line {line}: not a number: {s:?}")))
}

fn parse_opt(s: &str, line: usize) -> Result<Option<f64>, CliError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field(s, line).map(Some)
    }
}

/// Parse a trajectory CSV produced by [`write_trajectory_csv`]; the round
/// trip is bit-exact. Comment lines are skipped; the header is verified.
pub fn read_trajectory_csv(text: &str) -> Result<Vec<TrajRow>, CliError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line != TRAJ_HEADER {
                return Err(CliError::Config(format!(
                    "csv line {lineno}: unexpected header {line:?}"
                )));
            }
            saw_header = true;
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 11 {
            return Err(CliError::Config(format!(
                "csv line {lineno}: expected 11 fields, got {}",
                parts.len()
            )));
        }
        rows.push(TrajRow {
            t: parse_field(parts[0], lineno)?,
            mass: parse_field(parts[1], lineno)?,
            energy: parse_field(parts[2], lineno)?,
            grad_l2_sq: parse_field(parts[3], lineno)?,
            l_alpha2: parse_field(parts[4], lineno)?,
            variance: parse_field(parts[5], lineno)?,
            pt_norm_sq: parse_field(parts[6], lineno)?,
            n_monitor: parse_field(parts[7], lineno)?,
            e1: parse_opt(parts[8], lineno)?,
            e2: parse_opt(parts[9], lineno)?,
            boundary_fraction: parse_field(parts[10], lineno)?,
        });
    }
    if !saw_header {
        return Err(CliError::Config("csv: missing header line".into()));
    }
    Ok(rows)
}

/// Profile CSV: one row per grid point, columns x0[,x1[,x2]],re,im.
pub fn write_profile_csv(path: &Path, comment: &str, field: &Field) -> Result<(), CliError> {
    let g = field.grid();
    let d = g.d();
    let mut s = String::with_capacity(48 * (field.len() + 2));
    s.push_str(comment);
    for a in 0..d {
        s.push_str(&format!("x{a},"));
    }
    s.push_str("re,im\n");
    for (i, v) in field.values().iter().enumerate() {
        let x = g.point(i);
        for coord in x.iter().take(d) {
            s.push_str(&fmt_f64(*coord));
            s.push(',');
        }
        s.push_str(&format!("{},{}\n", fmt_f64(v.re), fmt_f64(v.im)));
    }
    write_text(path, &s)
}

/// Two-column CSV t,<name> from a time series.
pub fn write_series_csv(
    path: &Path,
    comment: &str,
    series: &TimeSeries,
    value_name: &str,
) -> Result<(), CliError> {
    let mut s = String::new();
    s.push_str(comment);
    s.push_str(&format!("t,{value_name}\n"));
    for (t, v) in series.times().iter().zip(series.values()) {
        s.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*v)));
    }
    write_text(path, &s)
}

/// Single-row CSV for report-style outputs.
pub fn write_report_csv(
    path: &Path,
    comment: &str,
    columns: &[&str],
    values: &[String],
) -> Result<(), CliError> {
    assert_eq!(columns.len(), values.len(), "report column/value count mismatch");
    let mut s = String::new();
    s.push_str(comment);
    s.push_str(&columns.join(","));
    s.push('\n');
    s.push_str(&values.join(","));
    s.push('\n');
    write_text(path, &s)
}
