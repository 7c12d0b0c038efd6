use thiserror::Error;

/// Errors raised by the models, solvers and configuration layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested harvested energy is at or above the harvester's ceiling,
    /// so no transmit energy can deliver it.
    #[error("harvest demand {demand:e} is not below the saturation level {ceiling:e}")]
    SaturationInfeasible { demand: f64, ceiling: f64 },

    /// A PEB gain evaluated to zero where a division by it was required.
    #[error("PEB gain is zero at pilot power {p_pilot:e} W")]
    ZeroGain { p_pilot: f64 },

    /// A model or instance violates one of its invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Configuration failure, tagged with the offending key and line (0 when
    /// the key came from an override rather than a file).
    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        key: String,
        line: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
