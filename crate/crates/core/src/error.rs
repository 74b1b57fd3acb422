use thiserror::Error;

/// Errors shared by the engine, the statistics kernel, and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// Simulation configuration rejected before the run starts.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data violates a documented precondition.
    #[error("input error: {0}")]
    Input(String),
    /// A parameter lies outside its documented domain.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Zero-variance sample: skewness and kurtosis are undefined.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    /// Malformed file content at a specific line.
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
