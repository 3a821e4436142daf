use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("start position {x0} is outside the state space of {spec}")]
    OutsideStateSpace { spec: String, x0: f64 },

    #[error("requested {requested} steps exceeds the memory budget of {budget} steps")]
    MemoryBudget { requested: usize, budget: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory has no increments")]
    EmptyTrajectory,

    #[error("position {x} at step {n} is not covered by any bin")]
    UncoveredPosition { n: usize, x: f64 },

    #[error("no ellipticity constant found down to {smallest}")]
    NoEllipticity { smallest: f64 },

    #[error("{0} has no finite one-step support")]
    NoFiniteSupport(String),

    #[error("degenerate regression design: {0}")]
    DegenerateFit(String),

    #[error("experiment refused: {0}")]
    Refused(String),

    #[error("malformed trajectory file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
