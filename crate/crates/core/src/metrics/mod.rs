//! Robustness diagnostics: cross-coherence, distortion, singular-value
//! deviation, brute-force restricted isometry constants, the polylogarithmic
//! sample-complexity factor, best s-term errors and the robustness coefficient.

mod bounds;
mod ensemble;
mod rip;

pub use bounds::{best_s_term_error, log_factor_l, robustness_coefficient};
pub use ensemble::{
    cross_coherence, distortion, joint_statistics, sv_deviation, ColumnEnsemble, Estimate, TrialStatistics,
};
pub use rip::{
    binomial, nsp_sufficiency, rip_bruteforce, rip_bruteforce_with_budget, NspSufficiencyReport, NspVerdict,
    RipReport, NSP_THRESHOLD,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bos::BosError;
use crate::numerics::LinalgError;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("invalid metric input: {0}")]
    InvalidInput(String),
    #[error("support enumeration needs {supports} supports, above the budget of {budget}")]
    BudgetExceeded { supports: u128, budget: u128 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bos(#[from] BosError),
}

/// Serialized form of one diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub quantity: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub trials: usize,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub seed: Option<u64>,
}

impl MetricRecord {
    pub fn new(quantity: impl Into<String>, estimate: f64) -> Self {
        Self {
            quantity: quantity.into(),
            parameters: BTreeMap::new(),
            trials: 1,
            estimate,
            std_error: None,
            seed: None,
        }
    }

    pub fn from_estimate(quantity: impl Into<String>, est: &Estimate, seed: Option<u64>) -> Self {
        Self {
            quantity: quantity.into(),
            parameters: BTreeMap::new(),
            trials: est.trials,
            estimate: est.mean,
            std_error: Some(est.std_error),
            seed,
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        );
        self
    }
}
