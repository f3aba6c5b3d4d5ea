use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("singular lattice basis (|det| = {0:e})")]
    SingularBasis(f64),

    #[error(
        "enumeration would visit {requested} coefficient vectors (cap {cap}); \
         try a box half-width of at most {suggested_half_width:.6}"
    )]
    EnumerationCap {
        requested: f64,
        cap: u64,
        suggested_half_width: f64,
    },

    #[error("grid of {size} points exceeds cap {cap}")]
    GridCap { size: u64, cap: u64 },

    #[error("grid too coarse: pitch {pitch:e} exceeds aliasing limit {limit:e}")]
    Aliasing { pitch: f64, limit: f64 },

    #[error("window function transform support {support:?} not inside window {window:?}")]
    SupportMismatch { support: (f64, f64), window: (f64, f64) },

    #[error("window function does not decay; spectrum enumeration is unbounded")]
    NonDecaying,

    #[error("budget violated: {used} >= {limit}")]
    Budget { used: f64, limit: f64 },

    #[error("construction infeasible: {0}")]
    Infeasible(String),

    #[error("zero total mass")]
    ZeroMass,

    #[error("too few interior centers: {got} (need {need})")]
    TooFewCenters { got: usize, need: usize },

    #[error("imaginary leak {leak:e} exceeds tolerance relative to max {max:e}")]
    ImaginaryLeak { leak: f64, max: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
