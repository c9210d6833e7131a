use alloc::string::String;

/// Errors raised by spaces, indexes and the parameter machinery.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error{}: {msg}", line.map(|l| alloc::format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, msg: String },

    #[error("duplicate sparse element id {0}")]
    DuplicateId(u32),

    #[error("missing required parameter '{0}'")]
    MissingParam(String),

    #[error("parameter '{name}': cannot interpret '{value}' as {kind}")]
    ParamType {
        name: String,
        value: String,
        kind: &'static str,
    },

    #[error("unknown or unused parameters: {0}")]
    UnusedParams(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown space '{0}'")]
    UnknownSpace(String),

    #[error("unknown method '{0}'")]
    UnknownMethod(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index format error: {0}")]
    Format(String),

    #[error("tuning failed: {0}")]
    Tuning(String),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse {
            line: None,
            msg: msg.into(),
        }
    }

    /// Attaches a 1-based line number to a parse error; other variants pass through.
    pub fn at_line(self, line: usize) -> Self {
        match self {
            Error::Parse { msg, .. } => Error::Parse {
                line: Some(line),
                msg,
            },
            Error::DuplicateId(id) => Error::Parse {
                line: Some(line),
                msg: alloc::format!("duplicate sparse element id {id}"),
            },
            other => other,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
