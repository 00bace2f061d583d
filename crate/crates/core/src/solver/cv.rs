use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pdhg::{PreparedOperator, SolverOptions};
use super::SolverError;
use crate::numerics::{CMatrix, RngStream};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    /// Share of the measurements used for reconstruction; the rest validates.
    pub reconstruction_fraction: f64,
    pub grid_count: usize,
    /// The eta grid spans `[lower_multiplier, upper_multiplier] * pivot` geometrically.
    pub lower_multiplier: f64,
    pub upper_multiplier: f64,
    /// Stream used for the random split.
    pub seed: u64,
    pub stream: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            reconstruction_fraction: 0.75,
            grid_count: 21,
            lower_multiplier: 1e-2,
            upper_multiplier: 1e2,
            seed: 0,
            stream: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.reconstruction_fraction > 0.0 && self.reconstruction_fraction < 1.0) {
            return Err(SolverError::InvalidInput(format!(
                "reconstruction_fraction must lie in (0, 1), got {}",
                self.reconstruction_fraction
            )));
        }
        if self.grid_count < 2 {
            return Err(SolverError::InvalidInput("grid_count must be >= 2".into()));
        }
        if !(self.lower_multiplier > 0.0 && self.upper_multiplier > self.lower_multiplier) {
            return Err(SolverError::InvalidInput(
                "need 0 < lower_multiplier < upper_multiplier".into(),
            ));
        }
        Ok(())
    }
}

/// `count` points from `lo` to `hi` with a constant ratio; both ends included exactly.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 2, "invalid geometric grid");
    let ratio = (hi / lo).ln();
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                lo * (ratio * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub eta: f64,
    /// `|A_v x_hat(eta) - y_v|_2`; absent when the solve failed.
    pub validation_residual: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    /// Selected value on the full-measurement scale.
    pub eta_cv: f64,
    /// Grid value minimizing the validation residual.
    pub eta_cv_validation: f64,
    pub argmin_index: usize,
    pub reconstruction_rows: Vec<usize>,
    pub validation_rows: Vec<usize>,
    pub table: Vec<CvPoint>,
}

/// Picks eta by hold-out validation.
///
/// The rows are split at random into reconstruction and validation blocks; for
/// every grid value QCBP is solved on the reconstruction block and scored by the
/// validation residual. The minimizer is mapped to the full measurement count by
/// `eta_cv = eta_val * sqrt(m / m_v)`. Failed grid points are kept in the table
/// and skipped.
pub fn cross_validate_eta(
    a: &CMatrix,
    y: &[Complex64],
    cfg: &CvConfig,
    pivot_eta: f64,
    options: SolverOptions,
) -> Result<CvOutcome, SolverError> {
    cfg.validate()?;
    let m = a.rows();
    if m < 4 {
        return Err(SolverError::InvalidInput(format!("cross-validation needs m >= 4, got {m}")));
    }
    if y.len() != m {
        return Err(SolverError::InvalidInput(format!(
            "measurement vector has length {} but the matrix has {m} rows",
            y.len()
        )));
    }
    if !(pivot_eta > 0.0 && pivot_eta.is_finite()) {
        return Err(SolverError::InvalidInput(format!("pivot eta must be positive, got {pivot_eta}")));
    }
    let m_r = ((cfg.reconstruction_fraction * m as f64).floor() as usize).clamp(1, m - 1);
    let m_v = m - m_r;
    let order = RngStream::new(cfg.seed, cfg.stream).sample_without_replacement(m, m);
    let mut reconstruction_rows = order[..m_r].to_vec();
    let mut validation_rows = order[m_r..].to_vec();
    reconstruction_rows.sort_unstable();
    validation_rows.sort_unstable();

    let a_r = a.select_rows(&reconstruction_rows);
    let a_v = a.select_rows(&validation_rows);
    let y_r: Vec<Complex64> = reconstruction_rows.iter().map(|&i| y[i]).collect();
    let y_v: Vec<Complex64> = validation_rows.iter().map(|&i| y[i]).collect();
    let op = PreparedOperator::new(&a_r, options)?;

    let grid = geometric_grid(
        cfg.lower_multiplier * pivot_eta,
        cfg.upper_multiplier * pivot_eta,
        cfg.grid_count,
    );
    let table: Vec<CvPoint> = par::map(grid.len(), |i| {
        let eta = grid[i];
        match op.solve(&y_r, eta) {
            Ok(report) => {
                let mut scratch = vec![Complex64::new(0.0, 0.0); m_v];
                a_v.apply_into(&report.x_hat, &mut scratch);
                let res = scratch
                    .iter()
                    .zip(&y_v)
                    .map(|(p, q)| (p - q).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                CvPoint {
                    eta,
                    validation_residual: Some(res),
                    converged: report.converged,
                    error: None,
                }
            }
            Err(e) => CvPoint {
                eta,
                validation_residual: None,
                converged: false,
                error: Some(e.to_string()),
            },
        }
    });

    let (argmin_index, _) = table
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.validation_residual.map(|r| (i, r)))
        .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
            Some((_, b)) if b <= r => best,
            _ => Some((i, r)),
        })
        .ok_or_else(|| SolverError::InvalidInput("every cross-validation solve failed".into()))?;
    let eta_cv_validation = grid[argmin_index];
    Ok(CvOutcome {
        eta_cv: eta_cv_validation * (m as f64 / m_v as f64).sqrt(),
        eta_cv_validation,
        argmin_index,
        reconstruction_rows,
        validation_rows,
        table,
    })
}
