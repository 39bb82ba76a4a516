use isrp_core::{Error, ErrorKind};

/// Failure classes, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Numerical(_) => "numerical",
        }
    }

    /// One line on stderr: `isrp: error[class]: message`.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("isrp: error[{}]: {}", self.class(), msg.trim())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    /// Errors raised while validating user-supplied settings.
    pub fn from_setting(e: Error) -> Self {
        CliError::Config(e.to_string())
    }

    /// Errors raised while reading or shaping input data.
    pub fn from_input(e: Error) -> Self {
        CliError::Data(e.to_string())
    }

    /// Errors raised during computation on already-validated inputs.
    pub fn from_compute(e: Error) -> Self {
        match e.kind() {
            ErrorKind::NonUniformGrid
            | ErrorKind::DimensionMismatch
            | ErrorKind::NonPositiveValue
            | ErrorKind::WindowTooLarge
            | ErrorKind::InvalidInput
            | ErrorKind::EmptyProfile => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
