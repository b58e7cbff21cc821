use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad configuration values or an unwritable output location.
    #[error("{0}")]
    Usage(String),
    /// A numerical procedure failed; a diagnostic manifest is still written.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

pub fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

impl From<spin32_core::Error> for CliError {
    fn from(e: spin32_core::Error) -> Self {
        use spin32_core::Error as E;
        match e {
            E::Domain(_) | E::Parse(_) => CliError::Usage(e.to_string()),
            E::Numerical(_) | E::Consistency(_) | E::Singularity { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}
