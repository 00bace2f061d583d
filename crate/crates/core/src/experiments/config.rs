use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::bos::SamplingMode;
use crate::solver::{CvConfig, SolverOptions, DEFAULT_OVERSAMPLE_FACTOR};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Fig1,
    Fig2,
    Fig3,
    SvCheck,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [Self::Fig1, Self::Fig2, Self::Fig3, Self::SvCheck];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig1 => "fig1",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::SvCheck => "sv_check",
        }
    }

    /// Stream id separating the random draws of different experiments.
    pub(crate) fn stream(self) -> u64 {
        match self {
            Self::Fig1 => 1,
            Self::Fig2 => 2,
            Self::Fig3 => 3,
            Self::SvCheck => 4,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(Self::Fig1),
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            "sv_check" | "sv-check" => Ok(Self::SvCheck),
            other => Err(ExperimentError::invalid("experiment.id", format!("unknown experiment {other:?}"))),
        }
    }
}

/// Measurement ensembles of the recovery comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Fourier,
    Gaussian,
}

/// Ensembles of the singular-value study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Fourier,
    Chebyshev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Params {
    pub n: usize,
    pub sparsity: usize,
    pub noise_norm: f64,
    /// `m / N` values; `m = round(ratio * N)`.
    pub ratios: Vec<f64>,
    pub matrices: Vec<MatrixKind>,
    /// Constraint levels; `0` is BP.
    pub etas: Vec<f64>,
    pub fourier_mode: SamplingMode,
}

impl Default for Fig1Params {
    fn default() -> Self {
        Self {
            n: 1000,
            sparsity: 10,
            noise_norm: 0.01,
            ratios: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95],
            matrices: vec![MatrixKind::Fourier, MatrixKind::Gaussian],
            etas: vec![0.0, 0.01],
            fourier_mode: SamplingMode::RowsWithoutReplacement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Params {
    /// Ambient dimensions; for each, `m` runs over `2, 4, …, N`.
    pub n_values: Vec<usize>,
    pub mode: SamplingMode,
}

impl Default for Fig2Params {
    fn default() -> Self {
        Self {
            n_values: vec![4, 8, 16, 32, 64, 128],
            mode: SamplingMode::Iid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Params {
    pub dim: usize,
    /// Hyperbolic-cross budget: all `nu` with `prod (nu_i + 1) <= budget`.
    pub budget: u64,
    pub m: usize,
    pub zetas: Vec<f64>,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_count: usize,
    pub oversample_factor: usize,
    /// Reconstruction share of the cross-validation split.
    pub cv_fraction: f64,
    pub cv_grid_count: usize,
    /// The cross-validation grid spans `[lower, upper] * eta_opt`.
    pub cv_lower_multiplier: f64,
    pub cv_upper_multiplier: f64,
}

impl Fig3Params {
    /// Cross-validation settings with the split drawn from stream `stream` of `seed`.
    pub fn cv_config(&self, seed: u64, stream: u64) -> CvConfig {
        CvConfig {
            reconstruction_fraction: self.cv_fraction,
            grid_count: self.cv_grid_count,
            lower_multiplier: self.cv_lower_multiplier,
            upper_multiplier: self.cv_upper_multiplier,
            seed,
            stream,
        }
    }
}

impl Default for Fig3Params {
    fn default() -> Self {
        let cv = CvConfig::default();
        Self {
            dim: 10,
            budget: 11,
            m: 50,
            zetas: vec![0.1, 1.0],
            eta_min: 1e-3,
            eta_max: 1e3,
            eta_count: 50,
            oversample_factor: DEFAULT_OVERSAMPLE_FACTOR,
            cv_fraction: cv.reconstruction_fraction,
            cv_grid_count: cv.grid_count,
            cv_lower_multiplier: cv.lower_multiplier,
            cv_upper_multiplier: cv.upper_multiplier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvCheckParams {
    pub ensembles: Vec<EnsembleKind>,
    pub m_values: Vec<usize>,
    /// Oversampling factors; `N = r * m`.
    pub oversampling: Vec<usize>,
    pub mode: SamplingMode,
}

impl Default for SvCheckParams {
    fn default() -> Self {
        Self {
            ensembles: vec![EnsembleKind::Fourier, EnsembleKind::Chebyshev],
            m_values: vec![4, 8, 16],
            oversampling: vec![2, 4, 8],
            mode: SamplingMode::Iid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum ExperimentParams {
    Fig1(Fig1Params),
    Fig2(Fig2Params),
    Fig3(Fig3Params),
    SvCheck(SvCheckParams),
}

impl ExperimentParams {
    pub fn id(&self) -> ExperimentId {
        match self {
            Self::Fig1(_) => ExperimentId::Fig1,
            Self::Fig2(_) => ExperimentId::Fig2,
            Self::Fig3(_) => ExperimentId::Fig3,
            Self::SvCheck(_) => ExperimentId::SvCheck,
        }
    }
}

/// A run configuration. In files, `seed` (default 0) and `trials` (default per
/// experiment) may be omitted; `schema_version` may not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ConfigFile")]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverOptions,
    pub experiment: ExperimentParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    #[serde(default)]
    seed: u64,
    trials: Option<usize>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    solver: SolverOptions,
    experiment: ExperimentParams,
}

impl From<ConfigFile> for ExperimentConfig {
    fn from(f: ConfigFile) -> Self {
        let trials = f.trials.unwrap_or_else(|| Self::default_for(f.experiment.id()).trials);
        Self {
            schema_version: f.schema_version,
            seed: f.seed,
            trials,
            output_dir: f.output_dir,
            solver: f.solver,
            experiment: f.experiment,
        }
    }
}

impl ExperimentConfig {
    /// Documented defaults for `id`.
    pub fn default_for(id: ExperimentId) -> Self {
        let (trials, experiment) = match id {
            ExperimentId::Fig1 => (20, ExperimentParams::Fig1(Fig1Params::default())),
            ExperimentId::Fig2 => (500, ExperimentParams::Fig2(Fig2Params::default())),
            ExperimentId::Fig3 => (10, ExperimentParams::Fig3(Fig3Params::default())),
            ExperimentId::SvCheck => (500, ExperimentParams::SvCheck(SvCheckParams::default())),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            trials,
            output_dir: None,
            solver: SolverOptions::default(),
            experiment,
        }
    }

    pub fn id(&self) -> ExperimentId {
        self.experiment.id()
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ExperimentError::invalid("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        use ExperimentError as E;
        if self.schema_version != SCHEMA_VERSION {
            return Err(E::invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.trials == 0 {
            return Err(E::invalid("trials", "must be >= 1"));
        }
        self.solver.validate().map_err(|e| E::invalid("solver", e.to_string()))?;
        match &self.experiment {
            ExperimentParams::Fig1(p) => {
                if p.n == 0 || p.sparsity == 0 || p.sparsity > p.n {
                    return Err(E::invalid("experiment.sparsity", "need 1 <= sparsity <= n"));
                }
                nonempty("experiment.ratios", &p.ratios)?;
                nonempty("experiment.matrices", &p.matrices)?;
                nonempty("experiment.etas", &p.etas)?;
                for &r in &p.ratios {
                    if !(r > 0.0 && r <= 1.0) {
                        return Err(E::invalid("experiment.ratios", format!("ratio {r} outside (0, 1]")));
                    }
                    if (r * p.n as f64).round() < 1.0 {
                        return Err(E::invalid("experiment.ratios", format!("ratio {r} gives m = 0")));
                    }
                }
                if !(p.noise_norm >= 0.0 && p.noise_norm.is_finite()) {
                    return Err(E::invalid("experiment.noise_norm", "must be finite and >= 0"));
                }
                if p.etas.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
                    return Err(E::invalid("experiment.etas", "must be finite and >= 0"));
                }
            }
            ExperimentParams::Fig2(p) => {
                nonempty("experiment.n_values", &p.n_values)?;
                if p.n_values.iter().any(|&n| n < 2) {
                    return Err(E::invalid("experiment.n_values", "every N must be >= 2"));
                }
            }
            ExperimentParams::Fig3(p) => {
                if p.dim == 0 || p.budget == 0 {
                    return Err(E::invalid("experiment.dim", "dim and budget must be >= 1"));
                }
                if p.m < 4 {
                    return Err(E::invalid("experiment.m", "need m >= 4 for cross-validation"));
                }
                nonempty("experiment.zetas", &p.zetas)?;
                if p.zetas.iter().any(|z| !(*z >= 0.0 && z.is_finite())) {
                    return Err(E::invalid("experiment.zetas", "must be finite and >= 0"));
                }
                if !(p.eta_min > 0.0 && p.eta_max >= p.eta_min && p.eta_max.is_finite()) {
                    return Err(E::invalid("experiment.eta_min", "need 0 < eta_min <= eta_max < inf"));
                }
                if p.eta_count < 2 {
                    return Err(E::invalid("experiment.eta_count", "must be >= 2"));
                }
                if p.oversample_factor == 0 {
                    return Err(E::invalid("experiment.oversample_factor", "must be >= 1"));
                }
                p.cv_config(0, 0)
                    .validate()
                    .map_err(|e| E::invalid("experiment.cv_fraction", e.to_string()))?;
            }
            ExperimentParams::SvCheck(p) => {
                nonempty("experiment.ensembles", &p.ensembles)?;
                nonempty("experiment.m_values", &p.m_values)?;
                nonempty("experiment.oversampling", &p.oversampling)?;
                if p.m_values.iter().any(|&m| m < 2) {
                    return Err(E::invalid("experiment.m_values", "every m must be >= 2"));
                }
                if p.oversampling.contains(&0) {
                    return Err(E::invalid("experiment.oversampling", "factors must be >= 1"));
                }
            }
        }
        Ok(())
    }
}

fn nonempty<T>(field: &str, v: &[T]) -> Result<(), ExperimentError> {
    if v.is_empty() {
        Err(ExperimentError::invalid(field, "must be nonempty"))
    } else {
        Ok(())
    }
}
