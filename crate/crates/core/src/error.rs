use std::io;

use thiserror::Error;

use crate::grid::Dims;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid dimensions must be positive, got {0}")]
    EmptyGrid(Dims),

    #[error("expected {expected} samples, got {found}")]
    SampleCount { expected: usize, found: usize },

    #[error("non-finite sample at ({m}, {n})")]
    NonFinite { m: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: Dims, found: Dims },

    #[error("region mask has no support samples")]
    NoSupportSamples,

    #[error("correlation coefficient must lie in (0, 1), got {0}")]
    InvalidRho(f64),

    #[error("weighting function has no support (sum of weights is zero)")]
    NoSupport,

    #[error("basis index {index} out of range for {len} basis functions")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{size} basis functions exceed the dense matrix limit of {limit}")]
    DenseLimit { size: usize, limit: usize },

    /// Every projection coefficient is below the floor; the model cannot be
    /// improved any further. Callers normally treat this as convergence.
    #[error("all projection coefficients are below the floor {floor:e}")]
    BelowFloor { floor: f64 },

    #[error("degenerate compensation denominator (magnitude {0:e})")]
    DegenerateDenominator(f64),

    #[error("synthesized model has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no room for a {block}x{block} block with {border}px clearance in a {dims} image")]
    Placement {
        dims: Dims,
        block: usize,
        border: usize,
    },

    #[error("loss pattern is empty")]
    EmptyPattern,

    #[error("lost region of {width}x{height} at ({x}, {y}) exceeds the {limit}px window limit")]
    ComponentTooLarge {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        limit: usize,
    },

    #[error("checkpoints must be sorted in ascending order")]
    UnsortedCheckpoints,

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("PGM maxval {0} exceeds 255")]
    MaxvalTooLarge(u32),

    #[error("truncated PGM payload: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("malformed PGM data: {0}")]
    MalformedData(String),

    #[error("sample {value} at ({m}, {n}) is outside [0, 255]")]
    SampleOutOfRange { m: usize, n: usize, value: f64 },

    #[error("mask value {value} at ({m}, {n}) is neither 0 (lost) nor 255 (received)")]
    InvalidMaskValue { m: usize, n: usize, value: f64 },

    #[error(transparent)]
    Io(#[from] io::Error),
}
