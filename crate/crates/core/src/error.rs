use thiserror::Error;

pub type Result<T> = std::result::Result<T, SkewError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkewError {
    /// An argument lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// All observations coincide, so a ratio-type measure is 0/0.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// `E(X - t)_- = 0`: the Omega ratio is infinite at `t`.
    #[error("Omega ratio undefined at t = {t}: no mass below the threshold")]
    OmegaUndefined { t: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl SkewError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        SkewError::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        SkewError::Degenerate(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        SkewError::Numerical(msg.into())
    }
}

impl From<std::io::Error> for SkewError {
    fn from(err: std::io::Error) -> Self {
        SkewError::Io(err.to_string())
    }
}

impl From<serde_json::Error> for SkewError {
    fn from(err: serde_json::Error) -> Self {
        SkewError::Spec(err.to_string())
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(SkewError::domain(format!("{name} = {p} must lie in (0, 1)")))
    }
}

pub(crate) fn check_lower_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(SkewError::domain(format!("alpha = {alpha} must lie in (0, 1/2)")))
    }
}
