use serde::{Deserialize, Serialize};

use super::{
    fig1, fig2, fig3, sv_check, ExperimentConfig, ExperimentError, ExperimentId, ExperimentRecord, Fig1Summary,
    Fig2Summary, Fig3Summary, SvCheckSummary, SCHEMA_VERSION,
};

/// Build and runtime facts that do not influence any result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub parallel: bool,
    pub threads: usize,
}

impl Environment {
    pub fn current() -> Self {
        #[cfg(feature = "parallel")]
        let threads = rayon::current_num_threads();
        #[cfg(not(feature = "parallel"))]
        let threads = 1;
        Self {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            parallel: cfg!(feature = "parallel"),
            threads,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SummaryBody {
    Fig1(Fig1Summary),
    Fig2(Fig2Summary),
    Fig3(Fig3Summary),
    SvCheck(SvCheckSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub schema_version: u32,
    pub experiment: ExperimentId,
    pub seed: u64,
    pub trials: usize,
    pub records: usize,
    pub failures: usize,
    pub environment: Environment,
    pub notes: Vec<String>,
    pub body: SummaryBody,
}

/// Aggregates a record table; depends on nothing but `records` and `cfg`.
pub fn summarize(cfg: &ExperimentConfig, records: &[ExperimentRecord]) -> Result<ExperimentSummary, ExperimentError> {
    if let Some(bad) = records.iter().find(|r| r.experiment != cfg.id()) {
        return Err(ExperimentError::Format(format!(
            "record of experiment {} in a {} table",
            bad.experiment,
            cfg.id()
        )));
    }
    let (body, notes) = match cfg.id() {
        ExperimentId::Fig1 => (SummaryBody::Fig1(fig1::summarize(records)), fig1::notes()),
        ExperimentId::Fig2 => (SummaryBody::Fig2(fig2::summarize(records)), fig2::notes()),
        ExperimentId::Fig3 => (SummaryBody::Fig3(fig3::summarize(records)), fig3::notes(cfg)),
        ExperimentId::SvCheck => (SummaryBody::SvCheck(sv_check::summarize(records)), sv_check::notes()),
    };
    Ok(ExperimentSummary {
        schema_version: SCHEMA_VERSION,
        experiment: cfg.id(),
        seed: cfg.seed,
        trials: cfg.trials,
        records: records.len(),
        failures: records.iter().filter(|r| r.failure.is_some()).count(),
        environment: Environment::current(),
        notes,
        body,
    })
}

/// Median of the values; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { 0.5 * (v[k - 1] + v[k]) })
}

pub(crate) fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Standard error of the mean (zero for fewer than two values).
pub(crate) fn std_error(values: &[f64]) -> f64 {
    let t = values.len();
    if t < 2 {
        return 0.0;
    }
    let mu = values.iter().sum::<f64>() / t as f64;
    let var = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (t - 1) as f64;
    (var / t as f64).sqrt()
}
