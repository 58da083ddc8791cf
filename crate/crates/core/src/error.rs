use thiserror::Error;

/// Errors produced by the geometric machinery, the solvers and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Three of the four basis points are collinear (or a matrix is singular).
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
    /// A point sits on the singular circle `1 + λ r² = 0` of the division model.
    #[error("point lies on the singular radius of the division model")]
    SingularRadius,
    /// The forward division map has no real solution for this radius.
    #[error("division model is not invertible at this radius")]
    NotInvertible,
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("search interval is empty or degenerate")]
    IntervalDegenerate,
    /// The leading coefficient in the eliminated variable vanishes identically.
    #[error("leading coefficient in the eliminated variable is identically zero")]
    DegreeDeficient,
    #[error("need at least {needed} correspondences, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("no model found: every sample was degenerate")]
    NoModelFound,
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
