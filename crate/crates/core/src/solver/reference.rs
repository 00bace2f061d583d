use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::bos::{evaluate_function_samples, sample_matrix, BosSystem, SamplingMode, SensingMatrix};
use crate::numerics::{least_squares, matvec, norm2, CVector, RngStream};

pub const DEFAULT_OVERSAMPLE_FACTOR: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaReference {
    pub x_ref: CVector,
    /// `|A x_ref - y|_2`.
    pub eta_opt: f64,
    /// Number of points in the oversampled least-squares grid.
    pub grid_size: usize,
}

/// Least-squares coefficients of `f` on `oversample_factor * N` fresh points drawn
/// from the system's measure.
pub fn least_squares_reference<F>(
    system: &BosSystem,
    f: F,
    oversample_factor: usize,
    rng: &RngStream,
) -> Result<(CVector, usize), SolverError>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if oversample_factor == 0 {
        return Err(SolverError::InvalidInput("oversample factor must be >= 1".into()));
    }
    let size = oversample_factor * system.len();
    let grid = sample_matrix(system, size, rng, SamplingMode::Iid)?;
    // The grid matrix carries a size^{-1/2} factor; scale the data to match.
    let scale = 1.0 / (size as f64).sqrt();
    let rhs: CVector = evaluate_function_samples(&f, grid.points())
        .into_iter()
        .map(|v| v * scale)
        .collect();
    Ok((least_squares(grid.matrix(), &rhs)?, size))
}

/// `eta_opt = |A x_ref - y|_2` where `x_ref` is the least-squares fit of `f` on an
/// independent grid of `oversample_factor * N` points.
pub fn eta_opt_reference<F>(
    a: &SensingMatrix,
    y: &[Complex64],
    system: &BosSystem,
    f: F,
    oversample_factor: usize,
    rng: &RngStream,
) -> Result<EtaReference, SolverError>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if a.cols() != system.len() {
        return Err(SolverError::InvalidInput(format!(
            "matrix has {} columns but the system has {} functions",
            a.cols(),
            system.len()
        )));
    }
    let (x_ref, grid_size) = least_squares_reference(system, f, oversample_factor, rng)?;
    let eta_opt = residual(a, &x_ref, y)?;
    Ok(EtaReference {
        x_ref,
        eta_opt,
        grid_size,
    })
}

/// `|A x - y|_2`.
pub fn residual(a: &SensingMatrix, x: &[Complex64], y: &[Complex64]) -> Result<f64, SolverError> {
    let ax = matvec(a.matrix(), x)?;
    if ax.len() != y.len() {
        return Err(SolverError::InvalidInput(format!(
            "measurement vector has length {} but the matrix has {} rows",
            y.len(),
            ax.len()
        )));
    }
    Ok(norm2(&ax.iter().zip(y).map(|(p, q)| p - q).collect::<Vec<_>>()))
}
