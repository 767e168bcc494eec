use thiserror::Error;

/// Errors raised by the risk engine and its applications.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    /// Argument outside the domain of a utility function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid numeric parameter (level outside (0,1), nonpositive scale, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Empty or non-finite input data.
    #[error("input error: {0}")]
    Input(String),

    /// The moment generating function of the loss does not exist where needed.
    #[error("mgf-nonexistent: {0}")]
    MgfNonexistent(String),

    /// Density generator whose cumulative generator diverges at zero.
    #[error("unsupported generator: {0}")]
    UnsupportedGenerator(String),

    /// Derivative requested at a kink.
    #[error("differentiability error: {0}")]
    Differentiability(String),

    /// Floating point range exceeded.
    #[error("range error: {0}")]
    Range(String),

    /// Reinsurance budget exceeds what a stop-loss above VaR can absorb.
    #[error("infeasible budget: premium {budget} must be below {bound}")]
    Infeasible { budget: f64, bound: f64 },

    /// Root search found no sign change.
    #[error("no root: {message}; scanned {scanned:?}")]
    NoRoot {
        message: String,
        scanned: Vec<(f64, f64)>,
    },

    /// Numerical routine failed to reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Malformed textual specification.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, RiskError>;

pub(crate) fn check_level(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(RiskError::Parameter(format!(
            "level must lie in (0,1), got {alpha}"
        )))
    }
}
