use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("function is constant; centering leaves it identically zero")]
    AllConstant,

    #[error("function does not have zero mean (|mean| = {mean:e}, tolerance {tol:e})")]
    NotZeroMean { mean: f64, tol: f64 },

    #[error("expected dimension {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("unknown function family `{0}`")]
    UnknownFamily(String),

    #[error("measures carry different mass: {mu} vs {nu}")]
    MassMismatch { mu: f64, nu: f64 },

    #[error("measure has empty support")]
    EmptySupport,

    #[error("transport problem is infeasible on the candidate arcs")]
    Infeasible,

    #[error("instance too large for dense {what}: {size} entries (limit {limit})")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("epsilon {eps} is not aligned with a grid of {n} cells per axis")]
    MisalignedEpsilon { eps: f64, n: usize },

    #[error("nodal measure is zero")]
    ZeroNodal,

    #[error("grid spacing {h} does not resolve bump radius {eps} (need h <= eps/8)")]
    ResolutionTooCoarse { h: f64, eps: f64 },

    #[error("bump radius {eps} exceeds the admissible bound {bound}")]
    EpsTooLarge { eps: f64, bound: f64 },

    #[error("need at least two sweep points to fit a slope, got {0}")]
    TooFewPoints(usize),

    #[error("no Neumann modes with eigenvalue in [{lo}, {hi}]")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("bad vertex subset: {0}")]
    BadSubset(String),

    #[error("exhaustive search over {count} subsets exceeds the cap of {cap}")]
    TooLargeForExhaustive { count: u128, cap: u128 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
