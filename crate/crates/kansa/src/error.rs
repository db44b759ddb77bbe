//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),

    #[error("direction must have unit Euclidean norm, got |v| = {0}")]
    NonUnitDirection(f64),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("boundary points not pairwise distinct: {0}")]
    BoundaryNotDistinct(String),

    #[error(
        "point not on the domain boundary: distance {distance:e} exceeds tolerance {tolerance:e}"
    )]
    NotOnBoundary { distance: f64, tolerance: f64 },

    #[error("unsupported domain/strategy pairing: {0}")]
    UnsupportedStrategy(String),

    #[error("at least one boundary point is required")]
    EmptyBoundary,

    #[error("sampling stalled: {accepted} accepted out of {proposals} proposals")]
    PathologicalSampling { accepted: u64, proposals: u64 },

    #[error("density value {value:e} exceeds its declared bound {bound:e}")]
    DensityBoundViolated { value: f64, bound: f64 },

    #[error(
        "complex argument 1 + \u{3b5}\u{b2}w = {re:e}{im:+e}i lies on the principal branch cut"
    )]
    BranchCut { re: f64, im: f64 },

    #[error("system has no right-hand side; attach one before solving")]
    MissingRhs,

    #[error("singular value decomposition did not converge within {0} iterations")]
    SvdNonConvergence(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
