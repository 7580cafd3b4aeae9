use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid exponent {0} outside 1..=12")]
    InvalidGrid(u32),
    #[error("interval (k={k}, j={j}) does not lie in the grid")]
    InvalidInterval { k: i32, j: u64 },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("the top interval has no parent")]
    TopScale,
    #[error("finest-scale interval has no children")]
    BottomScale,
    #[error("tiles are not pairwise disjoint: {0}")]
    DisjointnessViolation(String),
    #[error("tile set is not convex")]
    NonConvexTree,
    #[error("tile set is not a tree: {0}")]
    NotATree(String),
    #[error("size hypothesis failed: {0}")]
    SizeHypothesisFail(String),
    #[error("mean hypothesis failed: {0}")]
    MeanHypothesisFail(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFail(String),
    #[error("invalid witness: {0}")]
    WitnessInvalid(String),
    #[error("function does not have mean zero on {0}")]
    NotMeanZero(String),
    #[error("function is not real valued")]
    NotReal,
    #[error("function is not supported in {0}")]
    SupportViolation(String),
    #[error("average vanishes on {0}")]
    DegenerateAverage(String),
    #[error("packing bound violated: {0}")]
    PackingViolation(String),
    #[error("exponent out of range: {0}")]
    ExponentRange(String),
    #[error("accretivity failed: {0}")]
    AccretivityFail(String),
    #[error("para-accretivity failed: {0}")]
    ParaAccretivityFail(String),
    #[error("scale violation: {0}")]
    ScaleViolation(String),
    #[error("invalid accretive system: {0}")]
    SystemInvalid(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
