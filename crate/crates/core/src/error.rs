use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite argument {0}")]
    NonFinite(f64),
    #[error("argument z = {0} is below -100; oscillatory accuracy not guaranteed")]
    Overflow(f64),
    #[error("index {index} outside [{min}, {max}]")]
    OutOfRange { index: usize, min: usize, max: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("tridiagonal solve produced non-finite values at t = {0}")]
    SolverFailure(f64),
    #[error("window breach at t = {time}: tail mass fraction {fraction:e} exceeds {tol:e}")]
    WindowBreach { time: f64, fraction: f64, tol: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("need at least {needed} frames, got {got}")]
    InsufficientFrames { needed: usize, got: usize },
    #[error("interpolation error: {0}")]
    Interpolation(String),
    #[error("boundary extraction error: {0}")]
    BoundaryExtraction(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("mode j = {j} failed: {message}")]
    ModeFailure { j: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures that signal a violated physical or numerical
    /// invariant rather than bad input.
    pub fn is_invariant_breach(&self) -> bool {
        matches!(
            self,
            Error::WindowBreach { .. } | Error::SolverFailure(_) | Error::NonFinite(_)
        )
    }
}
