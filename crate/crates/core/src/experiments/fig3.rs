use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::summary::{mean, median};
use super::{experiment_stream, ExperimentConfig, ExperimentError, ExperimentParams, ExperimentRecord};
use crate::bos::{
    evaluate_function_samples, hyperbolic_cross, log_sum_function, sample_matrix, tensor_chebyshev_system,
    SamplingMode,
};
use crate::numerics::{norm2, CVector};
use crate::par;
use crate::solver::{
    cross_validate_eta, geometric_grid, least_squares_reference, residual, PreparedOperator, SolveReport,
    SolverError,
};
use crate::Complex64;

const GRID: &str = "grid";
const AT_ETA_OPT: &str = "eta_opt";
const AT_ETA_CV: &str = "eta_cv";

/// Noisy samples of `ln(d + 1 + sum x_i)` on a tensor Chebyshev hyperbolic cross;
/// QCBP over a geometric `eta` grid plus `eta_opt` and the cross-validated `eta`.
/// Errors are measured against the least-squares reference coefficients.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let ExperimentParams::Fig3(p) = &cfg.experiment else {
        return Err(ExperimentError::invalid("experiment.id", "run_fig3 needs a fig3 config"));
    };
    let root = experiment_stream(cfg);
    let system = tensor_chebyshev_system(p.dim, hyperbolic_cross(p.dim, p.budget)?)?;
    let n = system.len();
    // One reference for all trials: it depends on f and the oversampled grid only.
    let (x_ref, _) = least_squares_reference(&system, log_sum_function, p.oversample_factor, &root.derive_path(&[0]))?;
    let etas = geometric_grid(p.eta_min, p.eta_max, p.eta_count);

    let per_trial = par::map(cfg.trials, |trial| -> Result<Vec<ExperimentRecord>, ExperimentError> {
        let rng = root.derive_path(&[1, trial as u64]);
        // Operator entries phi_j(tau_k): undo the 1/sqrt(m) of the normalized matrix.
        let a = sample_matrix(&system, p.m, &rng.derive(0), SamplingMode::Iid)?.rescaled((p.m as f64).sqrt());
        let f = evaluate_function_samples(log_sum_function, a.points());
        let mut noise_rng = rng.derive(1);
        let g: Vec<f64> = (0..p.m).map(|_| noise_rng.standard_normal()).collect();
        let g_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let op = PreparedOperator::new(a.matrix(), cfg.solver)?;

        let mut out = Vec::new();
        for (zi, &zeta) in p.zetas.iter().enumerate() {
            let y: CVector = f.iter().zip(&g).map(|(v, e)| v + Complex64::new(zeta * e, 0.0)).collect();
            let noise_norm = zeta * g_norm;
            let eta_opt = residual(&a, &x_ref, &y)?;
            let split_stream = {
                let mut r = rng.derive(2 + zi as u64);
                (r.uniform() * (1u64 << 53) as f64) as u64
            };
            let cv = cross_validate_eta(
                a.matrix(),
                &y,
                &p.cv_config(cfg.seed, split_stream),
                eta_opt.max(f64::MIN_POSITIVE),
                cfg.solver,
            );
            let (eta_cv, cv_failure) = match &cv {
                Ok(o) => (Some(o.eta_cv), None),
                Err(e) => (None, Some(e.to_string())),
            };

            let mut cases: Vec<(&str, f64)> = etas.iter().map(|&e| (GRID, e)).collect();
            cases.push((AT_ETA_OPT, eta_opt));
            if let Some(e) = eta_cv {
                cases.push((AT_ETA_CV, e));
            }
            let solved: Vec<(Result<SolveReport, SolverError>, f64)> = par::map(cases.len(), |i| {
                let start = Instant::now();
                (op.solve(&y, cases[i].1), start.elapsed().as_secs_f64())
            });
            let base = |case: &str, eta: f64| {
                let mut rec =
                    ExperimentRecord::new(cfg.id(), zi, trial, cfg.seed, system.name(), n, p.m).with_noise(noise_norm, eta);
                rec.case = Some(case.to_string());
                rec.zeta = Some(zeta);
                rec.eta_opt = Some(eta_opt);
                rec.eta_cv = eta_cv;
                rec
            };
            for ((case, eta), (result, secs)) in cases.iter().zip(solved) {
                let mut rec = base(case, *eta);
                match result {
                    Ok(report) => {
                        let diff: CVector = report.x_hat.iter().zip(&x_ref).map(|(u, v)| u - v).collect();
                        rec.error = Some(norm2(&diff));
                        rec.objective = Some(report.objective);
                        rec.feasibility = Some(report.feasibility_residual);
                        rec.iterations = Some(report.iterations);
                        rec.converged = Some(report.converged);
                    }
                    Err(e) => rec.failure = Some(e.to_string()),
                }
                rec.wall_time_s = secs;
                out.push(rec);
            }
            if let Some(reason) = cv_failure {
                let mut rec = base(AT_ETA_CV, f64::NAN);
                rec.eta = None;
                rec.noise_norm = Some(noise_norm);
                rec.regime = None;
                rec.failure = Some(reason);
                out.push(rec);
            }
        }
        Ok(out)
    });
    let mut records = Vec::new();
    for part in per_trial {
        records.extend(part?);
    }
    Ok(records)
}

/// Outcome of one trial at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Trial {
    pub zeta: f64,
    pub trial: usize,
    pub noise_norm: f64,
    pub eta_opt: f64,
    pub eta_cv: Option<f64>,
    /// First grid index attaining the smallest error.
    pub argmin_index: usize,
    pub argmin_eta: f64,
    /// The minimizer is neither the first nor the last grid point.
    pub interior: bool,
    /// `argmin_eta / eta_opt` lies in `[1/10, 10]`.
    pub near_eta_opt: bool,
    pub min_error: f64,
    pub error_at_smallest_eta: Option<f64>,
    pub error_at_largest_eta: Option<f64>,
    pub underestimate_better: bool,
    pub error_at_eta_opt: Option<f64>,
    pub error_at_eta_cv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Curve {
    pub zeta: f64,
    pub trials: usize,
    pub etas: Vec<f64>,
    pub median_error: Vec<Option<f64>>,
    pub mean_eta_opt: Option<f64>,
    pub mean_eta_cv: Option<f64>,
    pub median_error_at_eta_opt: Option<f64>,
    pub median_error_at_eta_cv: Option<f64>,
    /// Trials whose minimizer is interior and within a factor 10 of `eta_opt`.
    pub interior_near_eta_opt: usize,
    /// Trials with error at the smallest `eta` below the error at the largest.
    pub underestimate_better: usize,
    pub unconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Summary {
    pub curves: Vec<Fig3Curve>,
    pub trials: Vec<Fig3Trial>,
}

pub(super) fn summarize(records: &[ExperimentRecord]) -> Fig3Summary {
    let mut by_level: BTreeMap<usize, BTreeMap<usize, Vec<&ExperimentRecord>>> = BTreeMap::new();
    for r in records {
        by_level.entry(r.grid_index).or_default().entry(r.trial).or_default().push(r);
    }
    let mut curves = Vec::new();
    let mut all_trials = Vec::new();
    for trials in by_level.values() {
        let mut level_trials = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        let mut etas: Vec<f64> = Vec::new();
        let mut unconverged = 0;
        let mut zeta = f64::NAN;
        for (&trial, rs) in trials {
            let grid: Vec<&&ExperimentRecord> = rs.iter().filter(|r| r.case.as_deref() == Some(GRID)).collect();
            let pick = |case: &str| rs.iter().find(|r| r.case.as_deref() == Some(case));
            unconverged += rs.iter().filter(|r| r.converged == Some(false)).count();
            if etas.is_empty() {
                etas = grid.iter().filter_map(|r| r.eta).collect();
                columns = vec![Vec::new(); grid.len()];
            }
            for (i, r) in grid.iter().enumerate() {
                if let (Some(col), Some(e)) = (columns.get_mut(i), r.error) {
                    col.push(e);
                }
            }
            let Some(first) = rs.first() else { continue };
            zeta = first.zeta.unwrap_or(f64::NAN);
            let best = grid
                .iter()
                .enumerate()
                .filter_map(|(i, r)| r.error.map(|e| (i, e)))
                .fold(None, |acc: Option<(usize, f64)>, (i, e)| match acc {
                    Some((_, b)) if b <= e => acc,
                    _ => Some((i, e)),
                });
            let Some((argmin_index, min_error)) = best else { continue };
            let eta_opt = first.eta_opt.unwrap_or(f64::NAN);
            let argmin_eta = grid[argmin_index].eta.unwrap_or(f64::NAN);
            let ratio = argmin_eta / eta_opt;
            let lo = grid.first().and_then(|r| r.error);
            let hi = grid.last().and_then(|r| r.error);
            level_trials.push(Fig3Trial {
                zeta,
                trial,
                noise_norm: first.noise_norm.unwrap_or(f64::NAN),
                eta_opt,
                eta_cv: first.eta_cv,
                argmin_index,
                argmin_eta,
                interior: argmin_index > 0 && argmin_index + 1 < grid.len(),
                near_eta_opt: (0.1..=10.0).contains(&ratio),
                min_error,
                error_at_smallest_eta: lo,
                error_at_largest_eta: hi,
                underestimate_better: matches!((lo, hi), (Some(a), Some(b)) if a < b),
                error_at_eta_opt: pick(AT_ETA_OPT).and_then(|r| r.error),
                error_at_eta_cv: pick(AT_ETA_CV).and_then(|r| r.error),
            });
        }
        let opt: Vec<f64> = level_trials.iter().map(|t| t.eta_opt).collect();
        let cv: Vec<f64> = level_trials.iter().filter_map(|t| t.eta_cv).collect();
        let at_opt: Vec<f64> = level_trials.iter().filter_map(|t| t.error_at_eta_opt).collect();
        let at_cv: Vec<f64> = level_trials.iter().filter_map(|t| t.error_at_eta_cv).collect();
        curves.push(Fig3Curve {
            zeta,
            trials: trials.len(),
            median_error: columns.iter().map(|c| median(c)).collect(),
            etas,
            mean_eta_opt: mean(&opt),
            mean_eta_cv: mean(&cv),
            median_error_at_eta_opt: median(&at_opt),
            median_error_at_eta_cv: median(&at_cv),
            interior_near_eta_opt: level_trials.iter().filter(|t| t.interior && t.near_eta_opt).count(),
            underestimate_better: level_trials.iter().filter(|t| t.underestimate_better).count(),
            unconverged,
        });
        all_trials.extend(level_trials);
    }
    Fig3Summary {
        curves,
        trials: all_trials,
    }
}

pub(super) fn notes(cfg: &ExperimentConfig) -> Vec<String> {
    let grid = match &cfg.experiment {
        ExperimentParams::Fig3(p) => format!("{} x N", p.oversample_factor),
        _ => "oversampled".into(),
    };
    vec![
        format!(
            "ground truth: errors are measured against x_ref, the least-squares fit of f on an independent {grid} Chebyshev grid, since f has no finite expansion"
        ),
        "noise: real Gaussian N(0, zeta^2) per measurement; one x_ref shared by all trials".into(),
        "eta_cv: validation-residual argmin rescaled by sqrt(m / m_validation)".into(),
    ]
}
