use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("precondition failed ({condition}): {detail}")]
    Precondition { condition: String, detail: String },
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("iterate left the ball at n = {n}: {detail}")]
    Divergence { n: i64, detail: String },
    #[error("domain violation at n = {n}: {which}")]
    DomainViolation { n: i64, which: String },
    #[error("model construction failed: {0}")]
    Model(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Numerical(_) => "numerical",
            Error::Usage(_) => "usage",
            Error::Precondition { .. } => "precondition",
            Error::Truncation(_) => "truncation",
            Error::Divergence { .. } => "divergence",
            Error::DomainViolation { .. } => "domain_violation",
            Error::Model(_) => "model",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
