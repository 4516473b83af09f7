use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("grid guard violated: {0}")]
    GridGuard(String),
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("rank-deficient design matrix")]
    RankDeficient,
    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Resolution { estimate: f64, tolerance: f64 },
    #[error("clusters not separated: gap statistic {0}")]
    Unresolved(f64),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
