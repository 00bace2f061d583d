//! Deterministic runners for the recovery comparison (fig1), the cross-coherence
//! bound (fig2), the noise-level sweep on a high-dimensional polynomial basis
//! (fig3) and the singular-value deviation study (sv_check).
//!
//! Every trial draws from its own stream keyed by (master seed, experiment,
//! grid point, trial), records are sorted canonically, and summaries are pure
//! functions of the record table, so a replay or a re-aggregation from CSV
//! reproduces the outputs exactly.

mod config;
mod fig1;
mod fig2;
mod fig3;
mod record;
mod summary;
mod sv_check;

pub use config::{
    EnsembleKind, ExperimentConfig, ExperimentId, ExperimentParams, Fig1Params, Fig2Params, Fig3Params, MatrixKind,
    SvCheckParams, SCHEMA_VERSION,
};
pub use fig1::{run_fig1, Fig1Group, Fig1Summary};
pub use fig2::{fig2_grid, run_fig2, Fig2Point, Fig2Summary};
pub use fig3::{run_fig3, Fig3Curve, Fig3Summary, Fig3Trial};
pub use record::{
    canonical_sort, read_records_csv, write_records_csv, write_timings_csv, ExperimentRecord, Regime, CSV_COLUMNS,
};
pub use summary::{median, summarize, Environment, ExperimentSummary, SummaryBody};
pub use sv_check::{run_sv_check, deviation_bound_rhs, SvCheckPoint, SvCheckSummary};

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bos::BosError;
use crate::metrics::MetricsError;
use crate::numerics::{LinalgError, RngStream};
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("malformed record table: {0}")]
    Format(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Bos(#[from] BosError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Self::InvalidConfig {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// Root stream of an experiment; trial streams derive from it.
pub(crate) fn experiment_stream(cfg: &ExperimentConfig) -> RngStream {
    RngStream::new(cfg.seed, cfg.id().stream())
}

/// Records plus their summary.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub records: Vec<ExperimentRecord>,
    pub summary: ExperimentSummary,
}

/// Validates `cfg`, runs the selected experiment and summarizes it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    cfg.validate()?;
    let mut records = match cfg.id() {
        ExperimentId::Fig1 => run_fig1(cfg)?,
        ExperimentId::Fig2 => run_fig2(cfg)?,
        ExperimentId::Fig3 => run_fig3(cfg)?,
        ExperimentId::SvCheck => run_sv_check(cfg)?,
    };
    canonical_sort(&mut records);
    let summary = summarize(cfg, &records)?;
    Ok(ExperimentRun {
        config: cfg.clone(),
        records,
        summary,
    })
}

/// Files written by [`write_outputs`].
pub const CONFIG_FILE: &str = "config.json";
pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMINGS_FILE: &str = "timings.csv";

/// Writes the resolved config, record table, summary and timings into `dir`.
pub fn write_outputs(dir: &Path, run: &ExperimentRun) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir)?;
    let paths: Vec<PathBuf> = [CONFIG_FILE, RECORDS_FILE, SUMMARY_FILE, TIMINGS_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    fs::write(&paths[0], run.config.to_json() + "\n")?;
    write_records_csv(fs::File::create(&paths[1])?, &run.records)?;
    fs::write(&paths[2], serde_json::to_string_pretty(&run.summary)? + "\n")?;
    write_timings_csv(fs::File::create(&paths[3])?, &run.records)?;
    Ok(paths)
}
