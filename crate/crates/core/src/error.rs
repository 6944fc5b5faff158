use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A record could not be decoded. `path` is the JSON field path inside the record.
    #[error("line {line}: at `{path}`: {message}")]
    Parse {
        line: usize,
        path: String,
        message: String,
    },

    #[error("document `{doc_id}`: {message}")]
    Validation { doc_id: String, message: String },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema fingerprint mismatch: model was trained for {model}, schema is {schema}")]
    FingerprintMismatch { model: String, schema: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
