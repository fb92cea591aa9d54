use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bandlimit violated: {0}")]
    Bandlimit(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("mode {mode} outside window [{lo}, {hi}]")]
    OutOfWindow { mode: i32, lo: i32, hi: i32 },

    #[error("layer {layer} out of range (network has {available} probe-able layers)")]
    LayerOutOfRange { layer: usize, available: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("config: {key}: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
