use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("{what} exceeds the dense limit of {limit}")]
    DimensionGuard { what: String, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("symplectic condition violated: {0}")]
    Symplectic(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("promise violated: {0}")]
    Promise(String),

    #[error("no conversion path from {from} to {to}: {reason}")]
    NoPath {
        from: String,
        to: String,
        reason: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("measurement outcome is not deterministic (largest probability {max_probability:.6})")]
    NotConcentrated { max_probability: f64 },

    #[error("chain is reducible: {0}")]
    Reducible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn guard(what: impl Into<String>, limit: usize) -> Self {
        Error::DimensionGuard {
            what: what.into(),
            limit,
        }
    }

    /// True for errors that reflect a violated precondition or promise of the
    /// caller rather than an internal failure.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::SizeMismatch { .. }
                | Error::DimensionGuard { .. }
                | Error::Parse(_)
                | Error::Symplectic(_)
                | Error::Precondition(_)
                | Error::Promise(_)
                | Error::NoPath { .. }
                | Error::Unsupported(_)
                | Error::Budget(_)
                | Error::NotConcentrated { .. }
                | Error::Reducible(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_same(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::SizeMismatch { left, right })
    }
}
