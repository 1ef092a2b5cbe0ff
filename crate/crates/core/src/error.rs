use thiserror::Error;

/// Errors raised by the lattice numerics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    /// A probe neither decayed nor diverged in the window it was given.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// NaN or infinity escaped the arithmetic backend.
    #[error("numeric fault at site {site}: {detail}")]
    NumericFault { site: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
