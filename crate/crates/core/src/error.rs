use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("regions overlap at site {0}")]
    OverlappingRegions(usize),

    #[error("curves for N={0} and N={1} do not cross in the sampled range")]
    NoCrossing(usize, usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no overlap between rescaled curves")]
    NoOverlap,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
