use thiserror::Error;

/// Errors surfaced by the lattice, solver and estimator operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty lattice: no interior site of a*Z^2 lies inside the domain")]
    EmptyLattice,
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("lattice too large for exact enumeration: {sites} sites > cap {cap}")]
    TooLarge { sites: usize, cap: usize },
    #[error("strip too wide for the transfer matrix: width {width} > cap {cap}")]
    TooWide { width: usize, cap: usize },
    #[error("the cluster sampler requires a zero external field")]
    WolffWithField,
    #[error("chaos normalization requested with inf lambda <= 0")]
    NonPositiveLambda,
    #[error("correlation table is missing subset {0:?}")]
    MissingCorrelation(Vec<usize>),
    #[error("requested chaos degree {requested} exceeds the kernel degree cap {cap}")]
    DegreeExceeded { requested: usize, cap: usize },
    #[error("wavelet family has regularity {have} but the norm needs at least {need}")]
    InsufficientRegularity { have: usize, need: usize },
    #[error("boundary box dimension {dim} is too large for alpha = {alpha} (needs dim < 2 + alpha)")]
    DimensionTooLarge { dim: f64, alpha: f64 },
    #[error("denominator partition function is zero")]
    ZeroDenominator,
    #[error("block ({i},{j}) contains no lattice site")]
    ZeroBlockMass { i: usize, j: usize },
    #[error("tilted disorder sampling requires the gaussian law")]
    NonGaussianLaw,
    #[error("empty sample set passed to the histogram estimator")]
    EmptySamples,
    #[error("annulus around block ({i},{j}) extends outside the lattice domain")]
    AnnulusOutsideDomain { i: usize, j: usize },
    #[error("insufficient tail mass: only {have} samples beyond the start of the t-grid (need {need})")]
    InsufficientTail { have: usize, need: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
