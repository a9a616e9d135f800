use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported grid size {0}: need an even count >= 8 of the form 2^a * 3^b")]
    UnsupportedSize(usize),
    #[error("unsupported dimension {0}: expected 1, 2 or 3")]
    UnsupportedDimension(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("operation not available on {0} geometry")]
    Geometry(&'static str),
    #[error("no crossing of the scaling constraint: quartic integral is {0}")]
    NoCrossing(f64),
    #[error("shooting bracket not found on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("snapshot density too low: spacing {spacing} exceeds {limit}")]
    InsufficientSnapshots { spacing: f64, limit: f64 },
    #[error("boosted slab needs times in [{need_lo}, {need_hi}] but block covers [{have_lo}, {have_hi}]")]
    SlabViolation {
        need_lo: f64,
        need_hi: f64,
        have_lo: f64,
        have_hi: f64,
    },
    #[error("field is not supported away from the box boundary (edge ratio {0:.3e})")]
    SupportViolation(f64),
    #[error("shifted bubble leaves the box: {0}")]
    BoxOverflow(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
