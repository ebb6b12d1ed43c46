use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("shooting bracket failure on [{lo}, {hi}]: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },
    #[error("profile did not decay within r = {r_max}")]
    NoDecay { r_max: f64 },
    #[error("no decay plateau detected: {0}")]
    NoPlateau(String),
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e}")]
    Quadrature { value: f64, error: f64 },
    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),
    #[error("field vanishes identically")]
    ZeroField,
    #[error("tabulated potential has no tail model")]
    UnknownTail,
    #[error("no sign-covering cell found on the surface mesh")]
    NoWitness,
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
