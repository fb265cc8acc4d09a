use std::path::PathBuf;

use dialectoscope_core::ErrorKind;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input file {} does not exist", .0.display())]
    MissingInput(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unknown token `{token}`; nearest vocabulary entries: {}", suggestions.join(", "))]
    UnknownToken { token: String, suggestions: Vec<String> },
    #[error(transparent)]
    Core(#[from] dialectoscope_core::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::MissingInput(_) => EXIT_CONFIG,
            AppError::Io { .. } | AppError::Parse { .. } | AppError::UnknownToken { .. } => EXIT_DATA,
            AppError::Core(e) => match e.kind() {
                ErrorKind::InvalidInput => EXIT_CONFIG,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numeric => EXIT_NUMERIC,
            },
        }
    }
}
