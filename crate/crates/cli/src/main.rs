//! `nls` — pseudo-spectral simulator and scattering diagnostics for the
//! nonlinear Schrödinger equation i u_t + Δu + λ|u|^α u = 0 in d = 1, 2, 3.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nls_cli::{execute, Command, Invocation};

const EXIT_HELP: &str = "Exit codes:
  0  success
  2  configuration error (including the dt·k_max² > π stability refusal)
  3  numerical divergence during simulate
  4  domain-validity failure (boundary mass exceeded its tolerance)
  5  I/O failure";

#[derive(Parser)]
#[command(
    name = "nls",
    version,
    about = "Simulator and scattering diagnostics for i u_t + \u{394}u + \u{3bb}|u|^\u{3b1} u = 0",
    after_help = EXIT_HELP
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the sectioned key=value config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs and plot scripts
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweep execution
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Echo the fully resolved configuration before running
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the equation and write an observable time series
    Simulate(RunArgs),
    /// Compute a ground-state profile and report its invariants
    Groundstate(RunArgs),
    /// Decide scattering vs non-scattering for one configuration
    Classify(RunArgs),
    /// Run classify across a declared parameter lattice
    Sweep(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.cmd {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Groundstate(a) => (Command::Groundstate, a),
        Cmd::Classify(a) => (Command::Classify, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    let inv = Invocation {
        cmd,
        config_path: args.config,
        out_dir: args.out,
        workers: args.workers,
        verbose: args.verbose,
    };
    match execute(&inv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nls: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
