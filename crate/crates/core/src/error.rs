use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: Minkowski norm deviates by {0:e}")]
    InvalidPoint(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("region too small for packing radius {0}")]
    RegionTooSmall(f64),
    #[error("invalid bump: {0}")]
    InvalidBump(String),
    #[error("factorization failure: jitter {jitter:e} exceeds cap {cap:e}")]
    Factorization { jitter: f64, cap: f64 },
    #[error("budget exceeded: {what} = {value} > cap {cap}")]
    BudgetExceeded { what: String, value: usize, cap: usize },
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
    #[error("kernel unavailable for d = {0}")]
    KernelUnavailable(usize),
    #[error("cross-validation mismatch: {0}")]
    CrossValidation(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown subcommand: {0}")]
    UnknownSubcommand(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConstraintViolation(_) => 2,
            Error::BudgetExceeded { .. } => 3,
            _ => 1,
        }
    }
}
