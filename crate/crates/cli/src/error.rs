use std::fmt;

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input file (exit 2).
    Config(String),
    /// A numerical routine did not converge (exit 3).
    NonConvergence(String),
    /// A checked property failed (exit 4).
    Violation(String),
    /// Anything else, typically I/O (exit 1).
    Other(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Violation(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::NonConvergence(m) => write!(f, "numerical non-convergence: {m}"),
            CliError::Violation(m) => write!(f, "property violation: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dnls_core::Error> for CliError {
    fn from(e: dnls_core::Error) -> Self {
        use dnls_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter { .. } | E::DimensionMismatch { .. } | E::Domain(_) | E::Format(_) | E::Json(_) => {
                CliError::Config(msg)
            }
            E::NotConverged { .. } | E::RootFind(_) | E::Consistency(_) => CliError::NonConvergence(msg),
            E::Io(_) => CliError::Other(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("i/o error: {e}"))
    }
}
