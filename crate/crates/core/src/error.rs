use thiserror::Error;

/// Errors raised by tree construction, scenario handling and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("time {time} outside 0..={horizon}")]
    TimeOutOfRange { time: usize, horizon: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("agent index {index} out of range ({count} agents)")]
    AgentIndex { index: usize, count: usize },
    #[error("process is not a martingale (max conditional drift {residual:.3e})")]
    NotMartingale { residual: f64 },
    #[error("mixed or unsupported preferences: {0}")]
    Preferences(String),
    #[error("negative aggregate endowment {value} at leaf {leaf}")]
    NegativeEndowment { leaf: usize, value: f64 },
    #[error("value-process uniqueness fails (denominator {denominator:.3e})")]
    ValueUniqueness { denominator: f64 },
    #[error("aggregate density process vanishes at node {node} (value {value:.3e})")]
    DensityVanishes { node: usize, value: f64 },
    #[error("necessary conditions for a quadratic equilibrium fail: {0}")]
    NecessaryConditions(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parameter out of bounds: {0}")]
    Bounds(String),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
