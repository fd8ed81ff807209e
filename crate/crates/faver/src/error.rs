//! Error type shared by every module of the crate.

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed container, header, or structured file.
    #[error("format error: {0}")]
    Format(String),

    /// Input the decoder recognizes but does not support (e.g. 10-bit video).
    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Frame index or window outside the valid range.
    #[error("out of bounds: {0}")]
    OutOfBounds(String),

    /// Precondition violation on an operation argument.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Input that cannot support the requested fit (all-equal or one-sided samples).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Non-finite values or a computation that lost numeric meaning.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A sampling plan with no usable temporal window.
    #[error("empty plan: {0}")]
    EmptyPlan(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Bad dataset contents; the message names the offending video/dimension.
    #[error("data error: {0}")]
    Data(String),

    /// Feature schema of a file or model does not match this build.
    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },

    /// Evaluation protocol cannot run on the given dataset.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Command-line level misuse.
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// Process exit code class: 1 usage, 2 data, 3 internal/I-O.
    pub fn exit_code(&self) -> i32 {
        match self {
            // Asking a command to run on nothing is a usage problem.
            Error::Usage(_) | Error::EmptyInput(_) => 1,
            Error::Format(_)
            | Error::Unsupported(_)
            | Error::OutOfBounds(_)
            | Error::InvalidInput(_)
            | Error::DegenerateInput(_)
            | Error::EmptyPlan(_)
            | Error::Data(_)
            | Error::SchemaMismatch { .. }
            | Error::Protocol(_) => 2,
            Error::Io(_) | Error::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
