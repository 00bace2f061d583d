use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::bos::{sample_matrix, BosSystem, SamplingMode, SensingMatrix};
use crate::numerics::{singular_values, CMatrix, RngStream};
use crate::par;

/// Columns `m_1, …, m_m` of `M = sqrt(m) A*`, either one fixed matrix or a
/// generator of i.i.d. draws for Monte-Carlo expectations.
///
/// Internally the columns are held as the rows of `M* = sqrt(m) A`, which is
/// the natural layout of a sampled matrix and leaves every statistic unchanged.
#[derive(Debug, Clone)]
pub struct ColumnEnsemble {
    source: Source,
    trials: usize,
}

#[derive(Debug, Clone)]
enum Source {
    Fixed(CMatrix),
    Sampled {
        system: BosSystem,
        m: usize,
        mode: SamplingMode,
        rng: RngStream,
    },
}

impl ColumnEnsemble {
    /// The realized columns of one sensing matrix (`trials = 1`).
    pub fn from_sensing(a: &SensingMatrix) -> Self {
        let m = a.rows() as f64;
        Self {
            source: Source::Fixed(a.matrix().scaled(m.sqrt())),
            trials: 1,
        }
    }

    /// Columns given directly as the `N x m` matrix `M`.
    pub fn from_columns(columns: &CMatrix) -> Self {
        Self {
            source: Source::Fixed(columns.adjoint()),
            trials: 1,
        }
    }

    /// Fresh sampling matrices; trial `t` uses `rng.derive(t)`.
    pub fn sampled(
        system: &BosSystem,
        m: usize,
        mode: SamplingMode,
        rng: &RngStream,
        trials: usize,
    ) -> Result<Self, MetricsError> {
        if m == 0 || trials == 0 {
            return Err(MetricsError::InvalidInput(format!(
                "ensemble needs m >= 1 and trials >= 1, got m={m}, trials={trials}"
            )));
        }
        Ok(Self {
            source: Source::Sampled {
                system: system.clone(),
                m,
                mode,
                rng: rng.clone(),
            },
            trials,
        })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    /// Number of columns `m`.
    pub fn m(&self) -> usize {
        match &self.source {
            Source::Fixed(w) => w.rows(),
            Source::Sampled { m, .. } => *m,
        }
    }

    /// Ambient dimension `N`.
    pub fn n(&self) -> usize {
        match &self.source {
            Source::Fixed(w) => w.cols(),
            Source::Sampled { system, .. } => system.len(),
        }
    }

    /// `M*` of trial `t`: row `k` is the conjugate of column `m_k`.
    pub fn draw(&self, t: usize) -> Result<CMatrix, MetricsError> {
        match &self.source {
            Source::Fixed(w) => Ok(w.clone()),
            Source::Sampled { system, m, mode, rng } => {
                let a = sample_matrix(system, *m, &rng.derive(t as u64), *mode)?;
                Ok(a.rescaled((*m as f64).sqrt()).matrix().clone())
            }
        }
    }
}

/// Monte-Carlo mean with its standard error; `values` are the per-trial statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub values: Vec<f64>,
}

impl Estimate {
    pub fn from_values(values: Vec<f64>) -> Self {
        let t = values.len();
        let mean = values.iter().sum::<f64>() / t as f64;
        let std_error = if t > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
            (var / t as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            trials: t,
            values,
        }
    }
}

/// `(1/N^2) max_k sum_{l != k} |<m_k, m_l>|^2` for one realization.
fn coherence_of(w: &CMatrix) -> f64 {
    let n = w.cols() as f64;
    let g = w.row_gram();
    (0..w.rows())
        .map(|k| {
            g.row(k)
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, v)| v.norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
        / (n * n)
}

/// `max_k | |m_k|^2 / N - 1 |` for one realization.
fn distortion_of(w: &CMatrix) -> f64 {
    let n = w.cols() as f64;
    (0..w.rows())
        .map(|k| (w.row(k).iter().map(|v| v.norm_sqr()).sum::<f64>() / n - 1.0).abs())
        .fold(0.0, f64::max)
}

/// `max_j |s_j(M / sqrt(N)) - 1|` over all `m` singular values.
fn sv_deviation_of(w: &CMatrix) -> Result<f64, MetricsError> {
    let scale = 1.0 / (w.cols() as f64).sqrt();
    let s = singular_values(&w.scaled(scale))?;
    Ok(s.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max))
}

fn per_trial<F>(ens: &ColumnEnsemble, stat: F) -> Result<Estimate, MetricsError>
where
    F: Fn(&CMatrix) -> Result<f64, MetricsError> + Sync + Send,
{
    let values = par::map(ens.trials(), |t| ens.draw(t).and_then(|w| stat(&w)));
    Ok(Estimate::from_values(values.into_iter().collect::<Result<_, _>>()?))
}

/// Cross-coherence `mu`: mean over trials of the worst-column off-diagonal Gram energy
/// divided by `N^2`. Requires `m >= 2`.
pub fn cross_coherence(ens: &ColumnEnsemble) -> Result<Estimate, MetricsError> {
    if ens.m() < 2 {
        return Err(MetricsError::InvalidInput("cross-coherence needs m >= 2".into()));
    }
    per_trial(ens, |w| Ok(coherence_of(w)))
}

/// Distortion `xi`: mean over trials of `max_k | |m_k|^2 / N - 1 |`.
pub fn distortion(ens: &ColumnEnsemble) -> Result<Estimate, MetricsError> {
    per_trial(ens, |w| Ok(distortion_of(w)))
}

/// Mean over trials of `max_j |s_j(M / sqrt(N)) - 1|`. Requires `N >= m`.
pub fn sv_deviation(ens: &ColumnEnsemble) -> Result<Estimate, MetricsError> {
    if ens.n() < ens.m() {
        return Err(MetricsError::InvalidInput(format!(
            "singular-value deviation needs N >= m, got N={}, m={}",
            ens.n(),
            ens.m()
        )));
    }
    per_trial(ens, sv_deviation_of)
}

/// Statistics of one trial, computed on the same draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStatistics {
    pub cross_coherence: f64,
    pub distortion: f64,
    /// Present when singular values were requested.
    pub sv_deviation: Option<f64>,
    pub sv_min: Option<f64>,
    pub sv_max: Option<f64>,
}

/// Per-trial `(mu, xi)` and optionally the singular-value deviation of `M / sqrt(N)`,
/// on shared draws, in trial order.
pub fn joint_statistics(ens: &ColumnEnsemble, singular_values_too: bool) -> Result<Vec<TrialStatistics>, MetricsError> {
    if ens.m() < 2 || (singular_values_too && ens.n() < ens.m()) {
        return Err(MetricsError::InvalidInput(format!(
            "joint statistics need m >= 2 (and N >= m for singular values), got N={}, m={}",
            ens.n(),
            ens.m()
        )));
    }
    par::map(ens.trials(), |t| {
        let w = ens.draw(t)?;
        let (sv_deviation, sv_min, sv_max) = if singular_values_too {
            let s = singular_values(&w.scaled(1.0 / (w.cols() as f64).sqrt()))?;
            (
                Some(s.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)),
                Some(s.iter().copied().fold(f64::INFINITY, f64::min)),
                Some(s.iter().copied().fold(0.0, f64::max)),
            )
        } else {
            (None, None, None)
        };
        Ok(TrialStatistics {
            cross_coherence: coherence_of(&w),
            distortion: distortion_of(&w),
            sv_deviation,
            sv_min,
            sv_max,
        })
    })
    .into_iter()
    .collect()
}
