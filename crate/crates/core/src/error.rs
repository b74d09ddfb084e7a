use thiserror::Error;

/// Errors raised by the toolkit, the solvers and the experiment front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("component mismatch: expected {expected}, got {got}")]
    ComponentMismatch { expected: usize, got: usize },

    #[error("symbol is not finite at frequency {frequency:?}")]
    SymbolSingularity { frequency: Vec<f64> },

    #[error("grid too small for a dyadic decomposition: highest level {max_level} < 1")]
    GridTooSmall { max_level: i32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time series is empty")]
    EmptySeries,

    #[error("index constraint violated: {0}")]
    IndexConstraintViolated(String),

    #[error("CFL violation at t = {time}: number {number:.3e} exceeds {limit}")]
    CflViolation { time: f64, number: f64, limit: f64 },

    #[error("vacuum approach at t = {time}: minimum {minimum:.4e} below floor {floor:.4e}")]
    VacuumApproach { time: f64, minimum: f64, floor: f64 },

    #[error("truncation invalid at t = {time}: inf(1 + S_m a) = {infimum:.4e} < {bound:.4e}")]
    TruncationInvalid { time: f64, infimum: f64, bound: f64 },

    #[error("non-finite values at t = {time}")]
    NonFinite { time: f64 },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
