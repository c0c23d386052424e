use thiserror::Error;

/// A failure with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input, unknown example: exit 2.
    #[error("{0}")]
    Input(String),
    /// The inputs parse but the instance cannot be built (e.g. P not ≪ Q): exit 3.
    #[error("{0}")]
    Precondition(String),
    /// A verification check exceeded its tolerance: exit 4.
    #[error("{0}")]
    Verification(String),
    /// Writing the output failed: exit 1.
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

impl From<infodiagram::Error> for CliError {
    fn from(e: infodiagram::Error) -> Self {
        use infodiagram::Error as E;
        let msg = e.to_string();
        match e {
            E::Ingestion { .. }
            | E::TooManySamplePoints { .. }
            | E::SetFunctionSize { .. }
            | E::SampleSpaceMismatch { .. }
            | E::InvalidDistribution(_)
            | E::EmptyInteraction => CliError::Input(msg),
            E::SingularSystem { .. } => CliError::Verification(msg),
            _ => CliError::Precondition(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
