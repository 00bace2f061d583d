use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::system::{BosSystem, Point};
use super::BosError;
use crate::numerics::{CMatrix, CVector, RngStream};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Independent draws from the orthogonality measure.
    Iid,
    /// Distinct points of a finite domain (row subsampling).
    RowsWithoutReplacement,
}

impl std::str::FromStr for SamplingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iid" => Ok(SamplingMode::Iid),
            "rows_without_replacement" => Ok(SamplingMode::RowsWithoutReplacement),
            other => Err(format!("unknown sampling mode `{other}`")),
        }
    }
}

/// Where the entries of a [`SensingMatrix`] came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    /// `A_kj = scale * m^{-1/2} phi_j(t_k)`.
    Bos {
        system: BosSystem,
        mode: SamplingMode,
        seed: u64,
        stream: u64,
        points: Vec<Point>,
        scale: f64,
    },
    /// I.i.d. real `N(0, 1/m)` entries, times `scale`.
    Gaussian { seed: u64, stream: u64, scale: f64 },
    /// Supplied directly.
    Explicit,
}

/// Dense `m x N` sensing matrix together with the recipe that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingMatrix {
    matrix: CMatrix,
    provenance: Provenance,
}

impl SensingMatrix {
    pub fn explicit(matrix: CMatrix) -> Self {
        Self {
            matrix,
            provenance: Provenance::Explicit,
        }
    }

    pub(crate) fn from_parts(matrix: CMatrix, provenance: Provenance) -> Self {
        Self { matrix, provenance }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn system_name(&self) -> &str {
        match &self.provenance {
            Provenance::Bos { system, .. } => system.name(),
            Provenance::Gaussian { .. } => "gaussian",
            Provenance::Explicit => "explicit",
        }
    }

    pub fn points(&self) -> &[Point] {
        match &self.provenance {
            Provenance::Bos { points, .. } => points,
            _ => &[],
        }
    }

    /// The same matrix multiplied by `factor`, with the factor recorded in the provenance.
    pub fn rescaled(&self, factor: f64) -> Self {
        let provenance = match &self.provenance {
            Provenance::Bos {
                system,
                mode,
                seed,
                stream,
                points,
                scale,
            } => Provenance::Bos {
                system: system.clone(),
                mode: *mode,
                seed: *seed,
                stream: *stream,
                points: points.clone(),
                scale: scale * factor,
            },
            Provenance::Gaussian {
                seed,
                stream,
                scale,
            } => Provenance::Gaussian {
                seed: *seed,
                stream: *stream,
                scale: scale * factor,
            },
            Provenance::Explicit => Provenance::Explicit,
        };
        let matrix = match provenance {
            Provenance::Explicit => self.matrix.scaled(factor),
            _ => replay_entries(&provenance, self.rows(), self.cols()),
        };
        Self { matrix, provenance }
    }

    /// Rows restricted to `rows`, keeping the matching sample points.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let provenance = match &self.provenance {
            Provenance::Bos {
                system,
                mode,
                seed,
                stream,
                points,
                scale,
            } => Provenance::Bos {
                system: system.clone(),
                mode: *mode,
                seed: *seed,
                stream: *stream,
                points: rows.iter().map(|&r| points[r].clone()).collect(),
                scale: *scale,
            },
            _ => Provenance::Explicit,
        };
        Self {
            matrix: self.matrix.select_rows(rows),
            provenance,
        }
    }

    /// Recomputes the entries from the provenance alone.
    pub fn replay(&self) -> Result<CMatrix, BosError> {
        Ok(match &self.provenance {
            Provenance::Explicit => self.matrix.clone(),
            p => replay_entries(p, self.rows(), self.cols()),
        })
    }
}

fn replay_entries(provenance: &Provenance, rows: usize, cols: usize) -> CMatrix {
    match provenance {
        Provenance::Bos {
            system,
            points,
            scale,
            ..
        } => assemble(system, points, *scale),
        Provenance::Gaussian {
            seed,
            stream,
            scale,
        } => gaussian_entries(rows, cols, &RngStream::new(*seed, *stream), *scale),
        Provenance::Explicit => unreachable!("explicit matrices carry no recipe"),
    }
}

fn assemble(system: &BosSystem, points: &[Point], scale: f64) -> CMatrix {
    let m = points.len();
    let factor = scale / (m as f64).sqrt();
    let rows = par::map(m, |k| {
        let mut row = system.eval_row(&points[k]);
        row.iter_mut().for_each(|v| *v *= factor);
        row
    });
    CMatrix::from_fn(m, system.len(), |i, j| rows[i][j])
}

/// Random sampling matrix `A_kj = m^{-1/2} phi_j(t_k)`.
///
/// In `Iid` mode point `k` is drawn from `rng.derive(k)`, so assembly is
/// independent of thread count. `RowsWithoutReplacement` draws `m` distinct
/// points of a finite domain from `rng` itself.
pub fn sample_matrix(
    system: &BosSystem,
    m: usize,
    rng: &RngStream,
    mode: SamplingMode,
) -> Result<SensingMatrix, BosError> {
    if m == 0 {
        return Err(BosError::InvalidParameter("number of samples m must be >= 1".into()));
    }
    let points: Vec<Point> = match mode {
        SamplingMode::Iid => par::map(m, |k| system.sample_point(&mut rng.derive(k as u64))),
        SamplingMode::RowsWithoutReplacement => {
            let size = system.domain_size().ok_or_else(|| BosError::ModeMismatch {
                system: system.name().to_string(),
                reason: "row subsampling requires a finite domain".into(),
            })?;
            if m > size {
                return Err(BosError::ModeMismatch {
                    system: system.name().to_string(),
                    reason: format!("cannot draw {m} distinct rows from a domain of size {size}"),
                });
            }
            let mut draw = rng.clone();
            draw.sample_without_replacement(size, m)
                .into_iter()
                .map(|k| vec![k as f64])
                .collect()
        }
    };
    let matrix = assemble(system, &points, 1.0);
    Ok(SensingMatrix {
        matrix,
        provenance: Provenance::Bos {
            system: system.clone(),
            mode,
            seed: rng.seed(),
            stream: rng.stream(),
            points,
            scale: 1.0,
        },
    })
}

fn gaussian_entries(m: usize, n: usize, rng: &RngStream, scale: f64) -> CMatrix {
    let sd = scale / (m as f64).sqrt();
    let rows = par::map(m, |k| {
        let mut r = rng.derive(k as u64);
        (0..n)
            .map(|_| Complex64::new(r.standard_normal() * sd, 0.0))
            .collect::<Vec<_>>()
    });
    CMatrix::from_fn(m, n, |i, j| rows[i][j])
}

/// I.i.d. real Gaussian matrix with entries `N(0, 1/m)`.
pub fn gaussian_matrix(m: usize, n: usize, rng: &RngStream) -> Result<SensingMatrix, BosError> {
    if m == 0 || n == 0 {
        return Err(BosError::InvalidParameter(format!(
            "Gaussian matrix needs m, N >= 1, got {m}x{n}"
        )));
    }
    Ok(SensingMatrix {
        matrix: gaussian_entries(m, n, rng, 1.0),
        provenance: Provenance::Gaussian {
            seed: rng.seed(),
            stream: rng.stream(),
            scale: 1.0,
        },
    })
}

/// Exact evaluations `f(t_1), …, f(t_m)` as a complex vector.
pub fn evaluate_function_samples<F>(f: F, points: &[Point]) -> CVector
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    par::map(points.len(), |k| Complex64::new(f(&points[k]), 0.0))
}

/// `f(x) = ln(d + 1 + sum_i x_i)` on `[-1, 1]^d`.
pub fn log_sum_function(x: &[f64]) -> f64 {
    (x.len() as f64 + 1.0 + x.iter().sum::<f64>()).ln()
}
