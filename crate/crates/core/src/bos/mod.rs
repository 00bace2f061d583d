//! Bounded orthonormal systems and the random sampling matrices built from them.

mod index_set;
pub mod io;
mod sampling;
mod system;

pub use index_set::{hyperbolic_cross, IndexSet, MultiIndex};
pub use sampling::{
    evaluate_function_samples, gaussian_matrix, log_sum_function, sample_matrix, Provenance,
    SamplingMode, SensingMatrix,
};
pub use system::{chebyshev_system, fourier_system, tensor_chebyshev_system, BosSystem, Point};

use thiserror::Error;

use crate::numerics::LinalgError;

#[derive(Debug, Error)]
pub enum BosError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sampling mode does not fit the {system} system: {reason}")]
    ModeMismatch { system: String, reason: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed container: {0}")]
    Format(String),
}
