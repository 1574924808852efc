use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mode count mismatch: spectrum has {spectrum} modes, basis has {basis}")]
    ModeMismatch { spectrum: usize, basis: usize },

    #[error("instance has {atoms} atoms, above the exact-solver cap of {cap}; use the entropic solver")]
    TooLarge { atoms: usize, cap: usize },

    #[error("tail modes leave the regime 2·α·t ≥ 1 (α_(M+1) = {alpha}, t = {t}); raise the truncation M")]
    TailRegime { alpha: f64, t: f64 },

    #[error("mass matrix is rank deficient (condition number {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
