use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow computing Fibonacci index {0}")]
    Overflow(usize),

    #[error("tangent potential singular at site {site} (distance {distance:e} from a pole)")]
    SingularPhase { site: i64, distance: f64 },

    #[error("QR iteration failed to deflate eigenvalue at index {index}")]
    NoConvergence { index: usize },

    #[error("inverse iteration stagnated for eigenvalue {index} (residual {residual:e})")]
    DefectivePair { index: usize, residual: f64 },

    #[error("transform requires L = q, got L = {len}, q = {q}")]
    IncommensurateSize { len: usize, q: u64 },

    #[error("resonant denominator at k = {k}")]
    Resonance { k: u64 },

    #[error("dual recursion denominator |b_k| < 1e-12 at k = {k}")]
    DivisionNearZero { k: i64 },

    #[error("quadrature abscissa landed on a logarithmic singularity")]
    SingularQuadrature,

    #[error("probe energy coincides with spectrum entry {index}")]
    DegenerateDistance { index: usize },

    #[error("state has zero norm")]
    ZeroState,

    #[error("only {usable} sites above the cutoff, need at least 10")]
    InsufficientSupport { usable: usize },

    #[error("point set is empty")]
    EmptySet,

    #[error("eigenvector basis condition estimate {cond:e} exceeds 1e12")]
    IllConditionedBasis { cond: f64 },

    #[error("piecewise-linear fit residual {residual} exceeds 0.05")]
    FitFailure { residual: f64 },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
