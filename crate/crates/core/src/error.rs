//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field has nonzero mean: |coeff(0)| = {magnitude:.3e} exceeds {tolerance:.3e}")]
    NonzeroMean { magnitude: f64, tolerance: f64 },

    #[error("shell index {j} outside dyadic range [{j_min}, {j_max}]")]
    ShellOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("multiplier exponent {0:.1} exceeds overflow guard 700")]
    Overflow(f64),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical blow-up at t = {time:.6}: l2 = {l2:.3e}, linf = {linf:.3e}")]
    BlowUp { time: f64, l2: f64, linf: f64 },

    #[error("quadrature did not stabilize under refinement: relative change {0:.3e}")]
    QuadratureDivergence(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed snapshot file: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems,
    /// 3 for blow-up, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 2,
            Error::BlowUp { .. } => 3,
            _ => 1,
        }
    }
}
