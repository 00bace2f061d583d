use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::summary::{mean, std_error};
use super::{experiment_stream, ExperimentConfig, ExperimentError, ExperimentParams, ExperimentRecord};
use crate::bos::fourier_system;
use crate::metrics::{joint_statistics, ColumnEnsemble};

/// `(N, m)` pairs: for every `N`, `m = 2, 4, …` up to `N`.
pub fn fig2_grid(n_values: &[usize]) -> Vec<(usize, usize)> {
    n_values
        .iter()
        .flat_map(|&n| {
            std::iter::successors(Some(2usize), |m| m.checked_mul(2))
                .take_while(move |&m| m <= n)
                .map(move |m| (n, m))
        })
        .collect()
}

/// Monte-Carlo cross-coherence (and distortion) of the Fourier ensemble over the `(N, m)` grid.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let ExperimentParams::Fig2(p) = &cfg.experiment else {
        return Err(ExperimentError::invalid("experiment.id", "run_fig2 needs a fig2 config"));
    };
    let root = experiment_stream(cfg);
    let mut records = Vec::new();
    for (gi, (n, m)) in fig2_grid(&p.n_values).into_iter().enumerate() {
        let start = Instant::now();
        let ens = ColumnEnsemble::sampled(&fourier_system(n)?, m, p.mode, &root.derive(gi as u64), cfg.trials)?;
        let stats = joint_statistics(&ens, false)?;
        let per_trial = start.elapsed().as_secs_f64() / cfg.trials as f64;
        for (t, s) in stats.into_iter().enumerate() {
            let mut rec = ExperimentRecord::new(cfg.id(), gi, t, cfg.seed, "fourier", n, m);
            rec.mu = Some(s.cross_coherence);
            rec.xi = Some(s.distortion);
            rec.wall_time_s = per_trial;
            records.push(rec);
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Point {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub mu: f64,
    pub mu_std_error: f64,
    /// `N * mu`.
    pub n_mu: f64,
    /// `m^2` (the bound with `K = 1`).
    pub bound: f64,
    pub holds: bool,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Summary {
    pub points: Vec<Fig2Point>,
    pub all_hold: bool,
    pub max_xi: f64,
}

pub(super) fn summarize(records: &[ExperimentRecord]) -> Fig2Summary {
    let mut groups: BTreeMap<usize, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.grid_index).or_default().push(r);
    }
    let points: Vec<Fig2Point> = groups
        .into_values()
        .map(|rs| {
            let (n, m) = (rs[0].n, rs[0].m);
            let mus: Vec<f64> = rs.iter().filter_map(|r| r.mu).collect();
            let xis: Vec<f64> = rs.iter().filter_map(|r| r.xi).collect();
            let mu = mean(&mus).unwrap_or(f64::NAN);
            let n_mu = n as f64 * mu;
            let bound = (m * m) as f64;
            Fig2Point {
                n,
                m,
                trials: mus.len(),
                mu,
                mu_std_error: std_error(&mus),
                n_mu,
                bound,
                holds: n_mu <= bound,
                xi: mean(&xis).unwrap_or(f64::NAN),
            }
        })
        .collect();
    Fig2Summary {
        all_hold: points.iter().all(|p| p.holds),
        max_xi: points.iter().map(|p| p.xi).fold(0.0, f64::max),
        points,
    }
}

pub(super) fn notes() -> Vec<String> {
    vec!["mu is the per-matrix max statistic averaged over trials; bound is m^2 (K = 1)".into()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_matches_powers_of_two() {
        let g = fig2_grid(&[4, 8, 16, 32, 64, 128]);
        assert_eq!(g.len(), 2 + 3 + 4 + 5 + 6 + 7);
        assert_eq!(&g[..2], &[(4, 2), (4, 4)]);
        assert_eq!(*g.last().unwrap(), (128, 128));
        assert_eq!(fig2_grid(&[12]), vec![(12, 2), (12, 4), (12, 8)]);
    }
}
