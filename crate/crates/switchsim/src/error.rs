use switchsim_core::friend::FriendError;
use switchsim_core::immersion::ImmersionError;
use switchsim_core::scenario::ScenarioError;
use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input. Exit 2.
    #[error("{0}")]
    Parse(String),
    /// Input parsed but violates a model invariant. Exit 3.
    #[error("{0}")]
    Invariant(String),
    /// A cross-check exceeded the tolerance. Exit 4.
    #[error("{0}")]
    Mismatch(String),
    /// The circuit graph has a directed cycle. Exit 5.
    #[error("{0}")]
    Cycle(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse(_) | Self::Io { .. } => 2,
            Self::Invariant(_) => 3,
            Self::Mismatch(_) => 4,
            Self::Cycle(_) => 5,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::InvalidConfig(_) => Self::Parse(e.to_string()),
            _ => Self::Invariant(e.to_string()),
        }
    }
}

impl From<ImmersionError> for CliError {
    fn from(e: ImmersionError) -> Self {
        match e {
            ImmersionError::CyclicGraph(_) => Self::Cycle(e.to_string()),
            ImmersionError::UnknownNode(_) | ImmersionError::DuplicateNode(_) => Self::Parse(e.to_string()),
            ImmersionError::IncompleteMap(_) => Self::Invariant(e.to_string()),
        }
    }
}

impl From<FriendError> for CliError {
    fn from(e: FriendError) -> Self {
        match e {
            FriendError::UnknownVariant(_) => Self::Parse(e.to_string()),
            _ => Self::Invariant(e.to_string()),
        }
    }
}
