use std::fmt;
use std::process::ExitCode;

use acd_core::AcdError;

/// A failed command, classified by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration: exit 1.
    Usage(String),
    /// Unreadable or invalid input data: exit 2.
    Data(String),
    /// Numerical failure during simulation or estimation: exit 3.
    Numerical(String),
    /// The command ran but a suite gate failed: exit 4.
    Gate(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Numerical(_) => 3,
            Self::Gate(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Data(m) => write!(f, "data error: {m}"),
            Self::Numerical(m) => write!(f, "numerical error: {m}"),
            Self::Gate(m) => write!(f, "gate failure: {m}"),
        }
    }
}

impl From<AcdError> for CliError {
    fn from(e: AcdError) -> Self {
        let msg = e.to_string();
        match e {
            AcdError::InvalidParameter { .. }
            | AcdError::InvalidConfig(_)
            | AcdError::InfiniteMean { .. }
            | AcdError::NotErgodic { .. }
            | AcdError::IndistinguishableFactors { .. } => Self::Usage(msg),
            AcdError::EmptySeries { .. }
            | AcdError::TooShort { .. }
            | AcdError::InvalidDuration { .. }
            | AcdError::DimensionMismatch { .. } => Self::Data(msg),
            AcdError::Explosion { .. } | AcdError::FilterDivergence { .. } | AcdError::Singular { .. } => {
                Self::Numerical(msg)
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
