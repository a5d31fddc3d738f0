use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of a special function.
    #[error("domain error in {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    /// An iterative or quadrature routine stopped before reaching its tolerance.
    #[error("{routine} did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Convergence {
        routine: &'static str,
        achieved: f64,
        requested: f64,
    },

    /// Two Meijer-G parameters differ by an integer and the contour fallback is disabled.
    #[error("degenerate Meijer-G parameters b[{i}]={bi} and b[{j}]={bj} differ by an integer")]
    DegenerateParameters { i: usize, j: usize, bi: f64, bj: f64 },

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Two computation routes for the same quantity disagree.
    #[error("internal consistency check failed for {quantity}: {lhs} vs {rhs}")]
    Consistency { quantity: &'static str, lhs: f64, rhs: f64 },

    #[error("closed form not applicable: {0}")]
    NotApplicable(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Domain { .. } | Error::InsufficientSamples { .. }
        )
    }
}
