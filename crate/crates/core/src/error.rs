use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} samples, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A field does not fit on the requested grid (truncated tails, missing
    /// diffraction lobes, element outside the detection domain).
    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("unsupported membrane mode ({m},{n}): the split detection implemented here requires even m and odd n")]
    UnsupportedMode { m: u32, n: u32 },

    /// An asymptotic construction was requested outside its validity range.
    #[error("approximation limit violated: {0}")]
    LimitInvalid(String),

    /// The weighting produces zero sensitivity, so the imprecision diverges
    /// and the efficiency is undefined.
    #[error("degenerate weighting: sensitivity vanishes, efficiency undefined")]
    DegenerateWeighting,

    #[error("refinement did not converge after {refinements} levels: last values {coarse} and {fine}")]
    NonConvergence {
        refinements: u32,
        coarse: f64,
        fine: f64,
    },

    /// A weight-function discontinuity does not lie on a grid cell boundary.
    #[error("misaligned discontinuity: {0}")]
    Misaligned(String),
}

pub type Result<T> = std::result::Result<T, Error>;
