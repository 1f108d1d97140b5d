use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("profit component is singular on the capital axis (x1 = x2 = 0)")]
    ZeroRadius,

    #[error("value {0} outside (0, 1]; arcsech is undefined there")]
    OutOfDomain(f64),

    #[error("invalid integration step {step} for extent {extent}")]
    InvalidStep { step: f64, extent: f64 },

    #[error("evaluation point lies within {distance:e} of the filament")]
    OnFilament { distance: f64 },

    #[error("cross-section radius must be positive, got {0}")]
    NonpositiveRadius(f64),

    #[error("cutoff radius d = {d} must satisfy 0 < d < 2L = {two_l}")]
    InvalidCutoff { d: f64, two_l: f64 },

    #[error("source grids are not congruent")]
    GridMismatch,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("contour is not closed (first and last points differ by {gap:e})")]
    OpenContour { gap: f64 },

    #[error("mesh boundary does not match the contour: {0}")]
    MeshBoundaryMismatch(String),

    #[error("need at least {needed} time slices, got {got}")]
    TooFewSlices { needed: usize, got: usize },

    #[error("field grid is incomplete: {0}")]
    IncompleteGrid(String),

    #[error("unemployment rate must be positive, got {0}")]
    ZeroUnemployment(f64),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
