use thiserror::Error;

/// Errors surfaced by grid construction, transforms, solvers and the
/// scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("band-limit violation: relative Fourier mass {mass:.3e} above half-Nyquist exceeds {limit:.3e}")]
    BandLimit { mass: f64, limit: f64 },
    #[error("support escape: boundary mass {mass:.3e} exceeds {limit:.3e}")]
    SupportEscape { mass: f64, limit: f64 },
    #[error("state not normalized: |norm - 1| = {defect:.3e}")]
    NotNormalized { defect: f64 },
    #[error("step resolution check failed: dt*|H| = {value:.3e} >= {limit}")]
    StepResolution { value: f64, limit: f64 },
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degree overflow: term degree {degree} exceeds bound {bound}")]
    DegreeOverflow { degree: usize, bound: usize },
    #[error("order bound exceeded: {0}")]
    OrderBound(String),
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    #[error("non-spacelike surface at node {0}")]
    NonSpacelike(usize),
    #[error("CFL violation: dt = {dt} must be below lattice spacing {a}")]
    Cfl { dt: f64, a: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
