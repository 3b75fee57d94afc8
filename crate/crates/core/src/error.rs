use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("precision of {0} decimal digits is below the supported minimum of 30")]
    PrecisionTooLow(u32),

    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("invalid sequence specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid control set: {0}")]
    InvalidMoos(String),

    #[error("error vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("combinatorial budget exceeded: {attempted} coefficient evaluations requested, limit is {limit}")]
    BudgetExceeded { attempted: u128, limit: u128 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
