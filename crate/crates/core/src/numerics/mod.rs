//! Dense complex linear algebra and reproducible random streams.

mod cholesky;
mod lstsq;
mod matrix;
mod rng;
mod svd;
pub mod tolerances;

pub use cholesky::{cholesky, forward_substitute, forward_substitute_rows};
pub use lstsq::least_squares;
pub use matrix::{dot, matvec, matvec_adjoint, norm1, norm2, norm_inf, CMatrix, CVector};
pub use rng::{
    chebyshev_point, complex_gaussian_vector, sample_chebyshev_point, RngStream,
};
pub use svd::singular_values;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("data length {actual} does not match {rows}x{cols}")]
    DataLength {
        rows: usize,
        cols: usize,
        actual: usize,
    },
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite entry at position {index}")]
    NonFinite { index: usize },
    #[error("least squares needs rows >= cols, got {rows}x{cols}")]
    Underdetermined { rows: usize, cols: usize },
    #[error("matrix is rank deficient: s_min/s_max = {ratio:e}")]
    RankDeficient { ratio: f64 },
}
