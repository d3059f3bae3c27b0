use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{origin}:{line}: {message}")]
    Parse { origin: String, line: usize, message: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] wlprereq_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn parse(origin: &str, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse { origin: origin.to_string(), line, message: message.into() }
    }

    /// 3 for a diverged run, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(wlprereq_core::Error::Divergence { .. }) => 3,
            _ => 2,
        }
    }
}
