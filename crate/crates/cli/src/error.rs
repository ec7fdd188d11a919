use std::fmt;

/// Failure of a subcommand, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or arguments (exit 2).
    Config(String),
    /// A recovery run produced non-finite iterates (exit 3).
    Divergence(String),
    /// At least one invariant check failed (exit 4).
    ChecksFailed(usize),
    /// Anything else, e.g. I/O (exit 1).
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::ChecksFailed(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    /// Classifies a library error raised while running `context`.
    pub fn from_core(context: &str, e: projdiff::Error) -> Self {
        use projdiff::Error as E;
        match e {
            E::Divergence { .. } | E::NumericFailure { .. } => CliError::Divergence(format!("{context}: {e}")),
            E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::Parse { .. } | E::ResourceLimit { .. } => {
                CliError::Config(format!("{context}: {e}"))
            }
            _ => CliError::Other(format!("{context}: {e}")),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Other(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Divergence(m) => write!(f, "numeric divergence: {m}"),
            CliError::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
            CliError::Other(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}
