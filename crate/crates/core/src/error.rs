use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {what}: {message}")]
    Parse { what: String, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("dimension mismatch for `{id}`: expected {expected}, found {found}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("missing embedding for `{0}`")]
    MissingEmbedding(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training diverged in {stage} at epoch {epoch}: loss = {loss}")]
    Divergence {
        stage: &'static str,
        epoch: usize,
        loss: f64,
    },

    #[error("{0}")]
    Insufficient(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }
}
