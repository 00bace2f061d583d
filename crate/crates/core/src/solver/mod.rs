//! QCBP / BP by primal-dual splitting, noise-level selection by
//! cross-validation, and the least-squares reference residual.

mod cv;
mod pdhg;
mod reference;

pub use cv::{cross_validate_eta, geometric_grid, CvConfig, CvOutcome, CvPoint};
pub use pdhg::{bp_solve, qcbp_solve, PreparedOperator, QcbpSpec, SolveReport, SolverOptions};
pub use reference::{
    eta_opt_reference, least_squares_reference, residual, EtaReference, DEFAULT_OVERSAMPLE_FACTOR,
};

use thiserror::Error;

use crate::bos::BosError;
use crate::numerics::LinalgError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error("problem declared infeasible after {iterations} iterations (dual objective {dual_objective:e})")]
    Infeasible {
        iterations: usize,
        dual_objective: f64,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bos(#[from] BosError),
}
