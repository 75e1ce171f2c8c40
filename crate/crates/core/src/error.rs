use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument falls outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A combination whose result is not a valuation: an all-zero potential
    /// product, or total conflict under Dempster's rule.
    #[error("undefined combination: {0}")]
    UndefinedCombination(String),

    /// A failure inside propagation, tagged with the vertex or edge where it happened.
    #[error("{location}: {source}")]
    Propagation {
        location: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at(self, location: impl Into<String>) -> Self {
        Error::Propagation {
            location: location.into(),
            source: Box::new(self),
        }
    }

    /// True if this error, or the error it wraps, is an undefined combination.
    pub fn is_undefined_combination(&self) -> bool {
        match self {
            Error::UndefinedCombination(_) => true,
            Error::Propagation { source, .. } => source.is_undefined_combination(),
            Error::Domain(_) => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
