use thiserror::Error;

/// Errors raised by the modeling, bootstrap, simulation and evaluation code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signal lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("value {value} outside the domain of {what}")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("decision variable has zero variance")]
    ZeroVariance,

    #[error("rho_att^2 + rho_unatt^2 = {0} must be below 1")]
    NormConstraint(f64),

    #[error("empty correlation set")]
    EmptySet,

    #[error("window length {window_s} s is not present on both grids")]
    GridMismatch { window_s: f64 },

    #[error("pool of {available} pairs cannot supply {requested}")]
    InsufficientPool { available: usize, requested: usize },

    #[error("no correlation pool for baseline window {window_s} s")]
    MissingPool { window_s: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Statistical failures (as opposed to malformed input): the data were
    /// well-formed but cannot support an estimate.
    pub fn is_statistical(&self) -> bool {
        matches!(
            self,
            Error::ZeroVariance | Error::TooFewSamples { .. } | Error::DegenerateWindow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
