use thiserror::Error;

/// Error taxonomy mirroring the CLI exit codes: config errors exit 2,
/// runtime errors 3, diagnostic-fatal conditions 4.
#[derive(Debug, Error)]
pub enum McError {
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("config error: {0}")]
    ConfigGeneral(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("runtime error: {0}")]
    Runtime(String),

    /// The run completed but produced results that cannot be trusted,
    /// e.g. a transition matrix with no positive eigenvalue.
    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl McError {
    pub fn exit_code(&self) -> i32 {
        match self {
            McError::Config { .. } | McError::ConfigGeneral(_) => 2,
            McError::Input(_) | McError::Runtime(_) | McError::Io(_) => 3,
            McError::Diagnostic(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, McError>;
