use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix or channel had an unexpected dimension.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A density matrix failed a validity check (Hermiticity, unit
    /// trace, positivity).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A channel failed a validity check (complete positivity, trace
    /// preservation) beyond the configured tolerance.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// A parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A post-selected pipeline retained zero probability, so the
    /// conditional output state is undefined.
    #[error("post-selection retained zero probability: {0}")]
    ZeroProbability(String),

    /// Fixed-point pumping did not converge within the iteration cap.
    #[error("purification pumping did not converge: {0}")]
    NonConvergent(String),

    /// A run-description file could not be parsed.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    /// Channel serialization input could not be decoded.
    #[error("serialization error: {0}")]
    Serialization(String),

    /// Wrapped I/O failure (reading configs, writing CSV output).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
