//! Gnuplot script generation. Scripts reference the emitted CSVs and their
//! columns by name, so plots regenerate without recomputation.

fn preamble(comment: &str) -> String {
    format!(
        "{comment}# gnuplot script: run `gnuplot <this file>` next to the CSVs\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set grid\n\
         set terminal pngcairo size 1280,900\n"
    )
}

/// Observable panels for a `simulate` run; companion runs add the frame
/// energies (e1, e2) panel.
pub fn simulate_script(comment: &str, prefix: &str, companion: bool) -> String {
    let csv = format!("{prefix}_series.csv");
    let mut s = preamble(comment);
    s.push_str(&format!("set output '{prefix}_observables.png'\n"));
    let layout = if companion { "2,3" } else { "2,2" };
    s.push_str(&format!("set multiplot layout {layout}\n"));
    s.push_str("set xlabel 't'\n");
    s.push_str(&format!(
        "plot '{csv}' using 't':'mass' with lines, '' using 't':'energy' with lines\n"
    ));
    s.push_str(&format!("plot '{csv}' using 't':'grad_l2_sq' with lines\n"));
    s.push_str(&format!(
        "plot '{csv}' using 't':'l_alpha2' with lines, '' using 't':'n_monitor' with lines\n"
    ));
    s.push_str("set logscale y\n");
    s.push_str(&format!("plot '{csv}' using 't':'boundary_fraction' with lines\n"));
    s.push_str("unset logscale y\n");
    if companion {
        s.push_str(&format!(
            "plot '{csv}' using 't':'e1' with lines, '' using 't':'e2' with lines\n"
        ));
        s.push_str(&format!("plot '{csv}' using 't':'variance' with lines\n"));
    }
    s.push_str("unset multiplot\n");
    s
}

/// Cauchy-increment decay (log-log) for a `classify` run.
pub fn classify_script(comment: &str, prefix: &str) -> String {
    let mut s = preamble(comment);
    s.push_str(&format!("set output '{prefix}_cauchy.png'\n"));
    s.push_str("set logscale xy\nset xlabel 't'\n");
    s.push_str(&format!(
        "plot '{prefix}_cauchy.csv' using 't':'sigma_increment' with linespoints\n"
    ));
    s
}

/// Ground-state profile plot. In d >= 2 the script plots the axis-0 line
/// through the box center (every n^(d-1)-th row of the row-major profile).
pub fn groundstate_script(comment: &str, prefix: &str, d: usize, n: usize) -> String {
    let csv = format!("{prefix}_profile.csv");
    let mut s = preamble(comment);
    s.push_str(&format!("set output '{prefix}_profile.png'\n"));
    s.push_str("set xlabel 'x0'\n");
    if d == 1 {
        s.push_str(&format!("plot '{csv}' using 'x0':'re' with lines\n"));
    } else {
        // Flat index j0·n^{d-1} + … ; the center line fixes all trailing
        // indices to n/2.
        let stride: usize = n.pow(d as u32 - 1);
        let mut start = 0usize;
        for a in 1..d {
            start += (n / 2) * n.pow((d - 1 - a) as u32);
        }
        s.push_str(&format!(
            "plot '{csv}' every {stride}::{start} using 'x0':'re' with lines title 'center line'\n"
        ));
    }
    s
}
