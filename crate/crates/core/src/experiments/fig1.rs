use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::summary::{mean, median};
use super::{experiment_stream, ExperimentConfig, ExperimentError, ExperimentParams, ExperimentRecord, MatrixKind};
use crate::bos::{fourier_system, gaussian_matrix, sample_matrix, SensingMatrix};
use crate::metrics::best_s_term_error;
use crate::numerics::{complex_gaussian_vector, matvec, norm2, CVector, RngStream};
use crate::par;
use crate::solver::PreparedOperator;
use crate::Complex64;

/// `s`-sparse vector with a uniform support, standard complex Gaussian entries, unit norm.
pub(crate) fn sparse_signal(n: usize, s: usize, rng: &RngStream) -> CVector {
    let mut r = rng.clone();
    let support = r.sample_without_replacement(n, s);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for j in support {
        x[j] = r.complex_normal();
    }
    let norm = norm2(&x);
    x.iter_mut().for_each(|v| *v /= norm);
    x
}

fn case_label(eta: f64) -> &'static str {
    if eta == 0.0 {
        "bp"
    } else {
        "qcbp"
    }
}

fn matrix_label(kind: MatrixKind) -> &'static str {
    match kind {
        MatrixKind::Fourier => "fourier",
        MatrixKind::Gaussian => "gaussian",
    }
}

/// BP and QCBP recovery of a random sparse vector from noisy Fourier and Gaussian
/// measurements over a grid of `m / N`.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let ExperimentParams::Fig1(p) = &cfg.experiment else {
        return Err(ExperimentError::invalid("experiment.id", "run_fig1 needs a fig1 config"));
    };
    let root = experiment_stream(cfg);
    let fourier = fourier_system(p.n)?;
    let jobs = p.ratios.len() * cfg.trials;
    let per_job = par::map(jobs, |job| -> Result<Vec<ExperimentRecord>, ExperimentError> {
        let (gi, trial) = (job / cfg.trials, job % cfg.trials);
        let m = (p.ratios[gi] * p.n as f64).round() as usize;
        let rng = root.derive_path(&[gi as u64, trial as u64]);
        let x = sparse_signal(p.n, p.sparsity, &rng.derive(0));
        let sigma_s = best_s_term_error(&x, p.sparsity);
        let noise = complex_gaussian_vector(&mut rng.derive(1), m, p.noise_norm);
        // Nominal norm: the draw is scaled to it exactly up to rounding, and the
        // regime label must not flip on the last ulp.
        let noise_norm = p.noise_norm;
        let mut out = Vec::new();
        for &kind in &p.matrices {
            let a: SensingMatrix = match kind {
                MatrixKind::Fourier => sample_matrix(&fourier, m, &rng.derive(2), p.fourier_mode)?,
                MatrixKind::Gaussian => gaussian_matrix(m, p.n, &rng.derive(3))?,
            };
            let y: CVector = matvec(a.matrix(), &x)?
                .into_iter()
                .zip(&noise)
                .map(|(u, v)| u + v)
                .collect();
            let start = Instant::now();
            let op = PreparedOperator::new(a.matrix(), cfg.solver);
            let prep_time = start.elapsed().as_secs_f64();
            for &eta in &p.etas {
                let mut rec = ExperimentRecord::new(cfg.id(), gi, trial, cfg.seed, matrix_label(kind), p.n, m)
                    .with_noise(noise_norm, eta);
                rec.case = Some(case_label(eta).to_string());
                rec.sigma_s = Some(sigma_s);
                let start = Instant::now();
                match op.as_ref().map_err(|e| e.to_string()).and_then(|op| op.solve(&y, eta).map_err(|e| e.to_string())) {
                    Ok(report) => {
                        let diff: CVector = report.x_hat.iter().zip(&x).map(|(u, v)| u - v).collect();
                        rec.error = Some(norm2(&diff));
                        rec.objective = Some(report.objective);
                        rec.feasibility = Some(report.feasibility_residual);
                        rec.iterations = Some(report.iterations);
                        rec.converged = Some(report.converged);
                    }
                    Err(e) => rec.failure = Some(e),
                }
                rec.wall_time_s = start.elapsed().as_secs_f64() + prep_time / p.etas.len() as f64;
                out.push(rec);
            }
        }
        Ok(out)
    });
    let mut records = Vec::new();
    for part in per_job {
        records.extend(part?);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Group {
    pub m: usize,
    pub n: usize,
    pub ratio: f64,
    pub system: String,
    pub case: String,
    pub eta: f64,
    pub trials: usize,
    pub failures: usize,
    pub unconverged: usize,
    pub median_error: Option<f64>,
    pub mean_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Summary {
    pub groups: Vec<Fig1Group>,
}

impl Fig1Summary {
    pub fn group(&self, m: usize, system: &str, eta: f64) -> Option<&Fig1Group> {
        self.groups.iter().find(|g| g.m == m && g.system == system && g.eta == eta)
    }
}

pub(super) fn summarize(records: &[ExperimentRecord]) -> Fig1Summary {
    let mut groups: BTreeMap<(usize, String, u64), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        let eta = r.eta.unwrap_or(0.0);
        groups.entry((r.grid_index, r.system.clone(), eta.to_bits())).or_default().push(r);
    }
    let groups = groups
        .into_values()
        .map(|rs| {
            let first = rs[0];
            let errors: Vec<f64> = rs.iter().filter_map(|r| r.error).collect();
            Fig1Group {
                m: first.m,
                n: first.n,
                ratio: first.m as f64 / first.n as f64,
                system: first.system.clone(),
                case: first.case.clone().unwrap_or_default(),
                eta: first.eta.unwrap_or(0.0),
                trials: rs.len(),
                failures: rs.iter().filter(|r| r.failure.is_some()).count(),
                unconverged: rs.iter().filter(|r| r.converged == Some(false)).count(),
                median_error: median(&errors),
                mean_error: mean(&errors),
            }
        })
        .collect();
    Fig1Summary { groups }
}

pub(super) fn notes() -> Vec<String> {
    vec![
        "signal: uniform support, standard complex Gaussian entries, normalized to unit l2 norm".into(),
        "error = |x - x_hat|_2; median over trials per (m, matrix, eta)".into(),
    ]
}
