use std::fmt;

use piggyback::Error as CodeError;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Parameter(String),
    Data(String),
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parameter(_) => 2,
            CliError::Data(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parameter(_) => "parameter",
            CliError::Data(_) => "data",
            CliError::Unsupported(_) => "unsupported_pattern",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Parameter(m) | CliError::Data(m) | CliError::Unsupported(m) => m,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.message() }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl From<CodeError> for CliError {
    fn from(e: CodeError) -> Self {
        let msg = e.to_string();
        match e {
            CodeError::Parameter(_) | CodeError::Domain(_) | CodeError::BudgetExceeded { .. } => {
                CliError::Parameter(msg)
            }
            CodeError::UnsupportedPattern(_) => CliError::Unsupported(msg),
            CodeError::InsufficientData { .. }
            | CodeError::Decode { .. }
            | CodeError::Inconsistent { .. }
            | CodeError::Repair { .. } => CliError::Data(msg),
        }
    }
}

pub fn io_err(context: impl fmt::Display) -> impl FnOnce(std::io::Error) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

pub type CliResult<T> = std::result::Result<T, CliError>;
