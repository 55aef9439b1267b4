use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {estimate:e} after {levels} levels")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        levels: usize,
    },

    #[error("positive-definite factorization failed: {0}")]
    Factorization(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        domain,
    }
}
