//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong while designing trajectories, evaluating
/// sensitivities, or running the stochastic verifiers.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is unphysical (non-positive mass, depth, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A function argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An evaluation point lies outside the range the object is defined on.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// The requested operation is not defined for this variant
    /// (e.g. the pointwise correlation of white noise).
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A sampled noise path is too coarse for the requested evaluation.
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    /// The time-dependent trap frequency was driven through zero; the
    /// nonlinear equations of motion are singular there.
    #[error("singular dynamics: {0}")]
    Singular(String),

    /// A statistical estimate is indistinguishable from numerical noise,
    /// so no fit can be extracted from it.
    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),

    /// A text input (config file, tabulated correlation) failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Underlying I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Convenience constructor for [`Error::Io`].
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Convenience constructor for [`Error::Parse`].
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
