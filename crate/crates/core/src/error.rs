use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("heterogeneous monomials: {first} has weighted degree {first_degree}, {second} has weighted degree {second_degree}")]
    Heterogeneous { first: String, first_degree: String, second: String, second_degree: String },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numeric error: {message} (best value {best_re:e}{best_im:+e}i, error estimate {err_est:e})")]
    Numeric { message: String, best_re: f64, best_im: f64, err_est: f64 },

    #[error("root finder did not converge: {message} (bracket [{lo:e}, {hi:e}])")]
    Bracket { message: String, lo: f64, hi: f64 },

    #[error("insufficient data: {usable} usable samples, at least {required} required")]
    InsufficientData { usable: usize, required: usize },

    #[error("domain coverage error at t = {t}: {detail}")]
    Coverage { t: f64, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error [{code}]: {message}")]
    Config { code: &'static str, message: String },
}

impl Error {
    /// Stable short code used by the command-line driver.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "E_DOMAIN",
            Error::Heterogeneous { .. } => "E_HETEROGENEOUS",
            Error::Unsupported(_) => "E_UNSUPPORTED",
            Error::Degenerate(_) => "E_DEGENERATE",
            Error::Numeric { .. } => "E_NUMERIC",
            Error::Bracket { .. } => "E_BRACKET",
            Error::InsufficientData { .. } => "E_INSUFFICIENT_DATA",
            Error::Coverage { .. } => "E_COVERAGE",
            Error::Parse(_) => "E_PARSE",
            Error::Config { code, .. } => code,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
