//! Command-line front end for the nls simulator: config parsing, the four
//! experiment commands (simulate, groundstate, classify, sweep), CSV
//! emission, and plot-script generation.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical divergence,
//! 4 domain-validity failure, 5 I/O failure.

pub mod config;
pub mod csvio;
pub mod error;
pub mod plot;
pub mod run;

pub use config::{parse_config, Family, Mode, RunConfig};
pub use error::CliError;
pub use run::{execute, Command, Invocation};
