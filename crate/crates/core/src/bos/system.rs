use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::index_set::IndexSet;
use super::BosError;
use crate::numerics::{sample_chebyshev_point, CVector, RngStream};

/// A point of the sampling domain; Fourier points are stored as integral floats.
pub type Point = Vec<f64>;

/// A bounded orthonormal system `{phi_j}` with its sampling measure and sup bound `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BosSystem {
    /// `phi_j(t) = exp(2 pi i j t / N)` on `{0, …, N-1}` with the uniform measure.
    Fourier { n: usize },
    /// `phi_0 = 1`, `phi_j(t) = sqrt(2) cos(j arccos t)` on `[-1, 1]` with the Chebyshev measure.
    Chebyshev { n: usize },
    /// Products of one-dimensional Chebyshev functions over a multi-index set.
    TensorChebyshev { indices: IndexSet },
}

pub fn fourier_system(n: usize) -> Result<BosSystem, BosError> {
    if n == 0 {
        return Err(BosError::InvalidParameter("Fourier system needs N >= 1".into()));
    }
    Ok(BosSystem::Fourier { n })
}

pub fn chebyshev_system(n: usize) -> Result<BosSystem, BosError> {
    if n == 0 {
        return Err(BosError::InvalidParameter("Chebyshev system needs N >= 1".into()));
    }
    Ok(BosSystem::Chebyshev { n })
}

pub fn tensor_chebyshev_system(dim: usize, indices: IndexSet) -> Result<BosSystem, BosError> {
    if indices.dim() != dim {
        return Err(BosError::InvalidParameter(format!(
            "index set has dimension {} but system dimension is {dim}",
            indices.dim()
        )));
    }
    Ok(BosSystem::TensorChebyshev { indices })
}

#[inline]
fn chebyshev_1d(j: u32, theta: f64) -> f64 {
    if j == 0 {
        1.0
    } else {
        SQRT_2 * (f64::from(j) * theta).cos()
    }
}

impl BosSystem {
    pub fn name(&self) -> &'static str {
        match self {
            BosSystem::Fourier { .. } => "fourier",
            BosSystem::Chebyshev { .. } => "chebyshev",
            BosSystem::TensorChebyshev { .. } => "tensor_chebyshev",
        }
    }

    /// Dimension `d` of the domain.
    pub fn dim(&self) -> usize {
        match self {
            BosSystem::Fourier { .. } | BosSystem::Chebyshev { .. } => 1,
            BosSystem::TensorChebyshev { indices } => indices.dim(),
        }
    }

    /// Number of functions `N`.
    pub fn len(&self) -> usize {
        match self {
            BosSystem::Fourier { n } | BosSystem::Chebyshev { n } => *n,
            BosSystem::TensorChebyshev { indices } => indices.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform bound `K` with `|phi_j| <= K`.
    pub fn bound(&self) -> f64 {
        match self {
            BosSystem::Fourier { .. } => 1.0,
            BosSystem::Chebyshev { n } => {
                if *n > 1 {
                    SQRT_2
                } else {
                    1.0
                }
            }
            BosSystem::TensorChebyshev { indices } => SQRT_2.powi(indices.max_active() as i32),
        }
    }

    /// Size of the domain when it is finite.
    pub fn domain_size(&self) -> Option<usize> {
        match self {
            BosSystem::Fourier { n } => Some(*n),
            _ => None,
        }
    }

    /// The `k`-th point of a finite domain.
    pub fn discrete_point(&self, k: usize) -> Option<Point> {
        self.domain_size()
            .filter(|&size| k < size)
            .map(|_| vec![k as f64])
    }

    /// `phi_j(point)`.
    pub fn eval(&self, j: usize, point: &[f64]) -> Complex64 {
        match self {
            BosSystem::Fourier { n } => {
                // Reduce j*t mod N in integers so the phase stays exact.
                let t = point[0] as u64;
                let r = (j as u64 * t) % (*n as u64);
                Complex64::from_polar(1.0, 2.0 * PI * r as f64 / *n as f64)
            }
            BosSystem::Chebyshev { .. } => {
                let theta = point[0].clamp(-1.0, 1.0).acos();
                Complex64::new(chebyshev_1d(j as u32, theta), 0.0)
            }
            BosSystem::TensorChebyshev { indices } => {
                let nu = &indices.indices()[j];
                let value = nu
                    .iter()
                    .zip(point)
                    .map(|(&k, &x)| chebyshev_1d(k, x.clamp(-1.0, 1.0).acos()))
                    .product();
                Complex64::new(value, 0.0)
            }
        }
    }

    /// `(phi_0(point), …, phi_{N-1}(point))`.
    pub fn eval_row(&self, point: &[f64]) -> CVector {
        match self {
            BosSystem::Fourier { .. } | BosSystem::Chebyshev { .. } => {
                (0..self.len()).map(|j| self.eval(j, point)).collect()
            }
            BosSystem::TensorChebyshev { indices } => {
                let max_degree = indices.max_degree() as usize;
                let tables: Vec<Vec<f64>> = point
                    .iter()
                    .map(|&x| {
                        let theta = x.clamp(-1.0, 1.0).acos();
                        (0..=max_degree).map(|k| chebyshev_1d(k as u32, theta)).collect()
                    })
                    .collect();
                indices
                    .indices()
                    .iter()
                    .map(|nu| {
                        let value: f64 = nu
                            .iter()
                            .zip(&tables)
                            .map(|(&k, table)| table[k as usize])
                            .product();
                        Complex64::new(value, 0.0)
                    })
                    .collect()
            }
        }
    }

    /// One draw from the orthogonality measure `nu`.
    pub fn sample_point(&self, rng: &mut RngStream) -> Point {
        match self {
            BosSystem::Fourier { n } => vec![rng.uniform_index(*n) as f64],
            BosSystem::Chebyshev { .. } => vec![sample_chebyshev_point(rng)],
            BosSystem::TensorChebyshev { indices } => {
                (0..indices.dim()).map(|_| sample_chebyshev_point(rng)).collect()
            }
        }
    }
}
