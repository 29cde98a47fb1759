use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("empty input")]
    EmptyInput,

    #[error("index {index} out of range 1..={max} for {what}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("{what} = {value} outside {expected}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("numeric overflow of the volatility recursion at step {step} (value {value})")]
    Overflow { step: usize, value: f64 },

    #[error("volatility transform domain error at step {step}: cannot invert {value}")]
    Domain { step: usize, value: f64 },

    #[error("density estimate {estimate} at {at} is not positive")]
    NonPositiveDensity { at: f64, estimate: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("replication with seed {seed}, stream {stream} aborted: {source}")]
    Replication {
        seed: u64,
        stream: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("oracle cache: {0}")]
    Cache(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for failures that come from explosive or ill-defined recursions
    /// rather than from bad input.
    pub fn is_numeric_abort(&self) -> bool {
        match self {
            Error::Overflow { .. } | Error::Domain { .. } => true,
            Error::Replication { source, .. } => source.is_numeric_abort(),
            _ => false,
        }
    }
}
