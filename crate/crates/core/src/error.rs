use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: best estimate {value:e}, achieved error {err:e}")]
    Quadrature { value: f64, err: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A quantity that must be non-negative for a physical density matrix came out negative.
    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("undetermined: {0}")]
    Undetermined(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("iteration budget exhausted: {0}")]
    Convergence(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

impl Error {
    /// Short machine-readable class used by the command-line front end.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Quadrature { .. } => "quadrature",
            Error::Precondition(_) => "precondition",
            Error::Consistency(_) => "consistency",
            Error::Undetermined(_) => "undetermined",
            Error::Fit(_) => "fit",
            Error::Convergence(_) => "convergence",
            Error::InvalidState(_) => "invalid-state",
        }
    }

    /// True for errors that signal a numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::Consistency(_)
                | Error::Convergence(_)
                | Error::Undetermined(_)
                | Error::Fit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
