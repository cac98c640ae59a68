use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integer overflow; largest safe bound is {largest_safe}")]
    Overflow { largest_safe: u64 },

    #[error("resource limit exceeded: {what} = {requested} > cap {cap}")]
    Resource {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error(
        "quadrature did not converge: {context} (relative change {change:.3e} after {doublings} doublings)"
    )]
    NonConvergence {
        context: String,
        change: f64,
        doublings: u32,
    },

    #[error("eigen residual certificate failed: residual {residual:.3e} > {bound:.3e}")]
    Certificate { residual: f64, bound: f64 },

    #[error("operation {op} unsupported for measure variant {variant}")]
    Unsupported { op: &'static str, variant: &'static str },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("empty: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of a numerical method (quadrature or eigen
    /// certificates), as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Certificate { .. })
    }
}
