use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid popularity: {0}")]
    InvalidPopularity(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration would exceed the configured subset cap.
    #[error("capacity exceeded: {what} needs {required} terms, cap is {cap}")]
    Capacity {
        what: String,
        required: u128,
        cap: u64,
    },

    #[error("negative probability {value:e} in {table} at index {index}")]
    NegativeProbability {
        table: String,
        index: usize,
        value: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidPopularity(_) => "invalid_popularity",
            Error::Domain(_) => "domain",
            Error::Capacity { .. } => "capacity",
            Error::NegativeProbability { .. } => "negative_probability",
            Error::Parse(_) => "parse",
        }
    }
}
