use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported order {0}: |nu| must not exceed {1}")]
    UnsupportedOrder(f64, f64),

    #[error("series structure error: {0}")]
    Structure(String),

    #[error("ill-conditioned basis, colliding terms: {}", .0.join(", "))]
    Conditioning(Vec<String>),

    #[error("tail not converged at cutoff {cutoff}: estimated tail {tail:e} exceeds {bound:e}")]
    Truncation { cutoff: f64, tail: f64, bound: f64 },

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u32, u32),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("quadrature accuracy {estimate:e} worse than requested {tolerance:e}")]
    Accuracy { estimate: f64, tolerance: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
