use thiserror::Error;

/// Errors raised by evaluators, scans and simulations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of the function.
    #[error("domain error in {func}: {reason} (got {value})")]
    Domain {
        func: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// Argument inside the mathematical domain but outside a cached table.
    #[error("range error in {func}: {value} outside configured domain [{lo}, {hi}]")]
    Range {
        func: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    /// Result not representable as a finite double.
    #[error("overflow in {func} at {value}: {hint}")]
    Overflow {
        func: &'static str,
        value: f64,
        hint: &'static str,
    },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_finite(func: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            value: x,
            reason: "argument must be finite",
        })
    }
}
