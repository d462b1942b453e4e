use std::path::PathBuf;

/// Crate-wide error type. `exit_code` groups variants into the process
/// exit classes used by the CLI: 1 usage, 2 data, 3 numeric failure.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("column {0:?} not found in header row")]
    MissingColumn(String),

    #[error("{path}: {message}")]
    BadData { path: PathBuf, message: String },

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("cache does not match cell parameters ({0})")]
    CacheMismatch(&'static str),

    #[error("optimizer kind mismatch: state holds {state}, step requires {wanted}")]
    OptimizerKind {
        state: &'static str,
        wanted: &'static str,
    },

    #[error("cannot encode an empty name")]
    EmptyName,

    #[error("state {0:?} is not in the model's state registry")]
    UnknownState(String),

    #[error("state registry needs at least 2 unique states, got {0}")]
    RegistryTooSmall(usize),

    #[error("duplicate state {0:?} in registry")]
    DuplicateState(String),

    #[error("model file has bad magic bytes")]
    BadMagic,

    #[error("model file version {0} is not supported")]
    UnsupportedVersion(u32),

    #[error("model file checksum mismatch (file is corrupt or truncated)")]
    ChecksumMismatch,

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("model file has no optimizer section; cannot resume")]
    MissingOptimizerSection,

    #[error("language table row {row}: weight {value} outside (0, 1]")]
    TableWeight { row: usize, value: f64 },

    #[error("language table row {row}: duplicate entry for ({state}, {language})")]
    TableDuplicate {
        row: usize,
        state: String,
        language: String,
    },

    #[error("states missing from language table: {}", .0.join(", "))]
    StatesMissingFromTable(Vec<String>),

    #[error("state probabilities sum to {0}, expected 1 within 1e-6")]
    UnnormalizedProbs(f64),

    #[error("test set is empty")]
    EmptyTestSet,

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn bad_data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::BadData {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code class for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArg(_) => 1,
            Error::NonFiniteLoss { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
