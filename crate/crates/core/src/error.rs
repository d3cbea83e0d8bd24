//! Error type shared by all modules of the crate.

/// Errors reported by matrix kernels, channel analysis, measurement
/// synthesis, and the simulator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Operand shapes are incompatible for the requested operation.
    #[error("shape mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    /// The operation is only defined for square matrices.
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    /// A singular value (or pivot) fell below the relative cutoff. For a
    /// channel this means a Schmidt coefficient is zero and faithful
    /// teleportation is impossible.
    #[error("matrix is singular within the relative cutoff {cutoff:.1e}")]
    Singular { cutoff: f64 },

    /// A matrix expected to be unitary failed the tolerance check.
    #[error("matrix is not unitary: max |u†u - 1| = {deviation:.3e} exceeds {tol:.1e}")]
    NotUnitary { deviation: f64, tol: f64 },

    /// A set of measurement operators violates Tr(a†b) = δ.
    #[error("operators {i} and {j} are not orthonormal: deviation {deviation:.3e}")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },

    /// The SVD sweep loop hit its iteration cap before converging.
    #[error("SVD did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    /// A projection annihilated the state; no normalized output exists.
    #[error("outcome probability {p:.3e} is too small to normalize the post-measurement state")]
    ZeroProbability { p: f64 },

    /// Invalid matrix construction data (entry count, non-finite values).
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// A state failed validation (normalization, Hermiticity, positivity).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A channel failed validation (dimension, normalization).
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// A measurement basis failed validation.
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    /// The requested analysis is not defined at this dimension.
    #[error("dimension {n} unsupported: {reason}")]
    UnsupportedDimension { n: usize, reason: String },

    /// A partially-entangled-only analysis was asked to certify a
    /// maximally entangled shape.
    #[error("degenerate shape: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
