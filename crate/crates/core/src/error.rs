use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid market parameters: {0}")]
    InvalidParams(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid pricing profile: {0}")]
    InvalidProfile(String),

    #[error("invalid reservation vector: {0}")]
    InvalidReservation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("boundary condition not bracketed on alpha in [{lo}, {hi}]: phi_top(1) - U = {f_lo} .. {f_hi}")]
    Unbracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("implicit step has nonpositive coefficient {0}; grid too coarse for this recursion")]
    IllConditionedStep(f64),

    #[error("profile format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
