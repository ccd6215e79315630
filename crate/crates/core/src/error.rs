use thiserror::Error;

/// Errors raised by the MMD, slicing and flow routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two particle sets (or a set and a matrix) disagree on the ambient dimension.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// Shapes of two matrices disagree.
    #[error("shape mismatch: ({0}, {1}) vs ({2}, {3})")]
    ShapeMismatch(usize, usize, usize, usize),

    /// A particle set needs at least one point and one dimension.
    #[error("particle set must be non-empty (n = {n}, d = {d})")]
    EmptyParticleSet { n: usize, d: usize },

    /// A coordinate is NaN or infinite.
    #[error("non-finite coordinate at particle {particle}, dimension {dim}")]
    NonFinite { particle: usize, dim: usize },

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Kernel parameter out of range for its family.
    #[error("invalid kernel parameter: {0}")]
    InvalidKernel(String),

    /// The sorting fast path only covers the negative distance kernel.
    #[error("sliced fast path requires the Riesz kernel with r = 1 (got {0}); use naive_grad instead")]
    UnsupportedFastPath(String),

    /// Flow configuration violates its invariants.
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),

    /// Some coordinate left the finite range during a flow update.
    #[error("flow diverged at step {step}: particle {particle}, dimension {dim} = {value}")]
    FlowDivergence {
        step: usize,
        particle: usize,
        dim: usize,
        value: f64,
    },

    /// Relative error is undefined against a zero reference gradient.
    #[error("relative error undefined: reference gradient has zero norm")]
    ZeroReference,

    /// Regression needs at least three strictly positive points.
    #[error("log-log fit needs >= 3 positive points: {0}")]
    InvalidFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
