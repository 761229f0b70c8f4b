//! Error type carrying the documented process exit codes.

use std::fmt;
use std::path::Path;

/// Failure categories, each mapped to a distinct exit code:
/// configuration 2, numerical divergence 3, domain validity 4, I/O 5.
#[derive(Clone, Debug)]
pub enum CliError {
    Config(String),
    Divergence(String),
    Domain(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Domain(_) => 4,
            CliError::Io(_) => 5,
        }
    }

    /// Wrap an I/O failure with the path it concerns.
    pub fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Divergence(m) => write!(f, "divergence: {m}"),
            CliError::Domain(m) => write!(f, "domain validity: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nls_core::Error> for CliError {
    fn from(e: nls_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
