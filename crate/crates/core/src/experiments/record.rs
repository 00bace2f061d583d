use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::{ExperimentError, ExperimentId};

/// Which side of the noise assumption a `(|n|_2, eta)` pair falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `|n|_2 <= eta`.
    NoiseBounded,
    /// `|n|_2 > eta`.
    NoiseExceedsEta,
}

impl Regime {
    pub fn classify(noise_norm: f64, eta: f64) -> Self {
        if noise_norm <= eta {
            Self::NoiseBounded
        } else {
            Self::NoiseExceedsEta
        }
    }
}

/// One row per (trial, grid point). Fields that do not apply to an experiment are `None`
/// and appear as empty CSV cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: ExperimentId,
    /// Index of the swept grid point, in configuration order.
    pub grid_index: usize,
    pub trial: usize,
    /// Master seed of the run.
    pub seed: u64,
    /// Matrix or ensemble label (`fourier`, `gaussian`, `chebyshev`, `tensor_chebyshev`).
    pub system: String,
    pub n: usize,
    pub m: usize,
    /// Sub-case inside a grid point, e.g. `bp` / `qcbp` or `grid` / `eta_opt` / `eta_cv`.
    pub case: Option<String>,
    pub zeta: Option<f64>,
    pub eta: Option<f64>,
    pub noise_norm: Option<f64>,
    pub regime: Option<Regime>,
    pub error: Option<f64>,
    pub sigma_s: Option<f64>,
    pub mu: Option<f64>,
    pub xi: Option<f64>,
    pub sv_deviation: Option<f64>,
    pub sv_min: Option<f64>,
    pub sv_max: Option<f64>,
    pub eta_opt: Option<f64>,
    pub eta_cv: Option<f64>,
    pub objective: Option<f64>,
    pub feasibility: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub failure: Option<String>,
    /// Seconds spent on this record; kept out of the record table so that
    /// replays are byte-identical, and written to a separate timing file.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl ExperimentRecord {
    pub fn new(experiment: ExperimentId, grid_index: usize, trial: usize, seed: u64, system: &str, n: usize, m: usize) -> Self {
        Self {
            experiment,
            grid_index,
            trial,
            seed,
            system: system.to_string(),
            n,
            m,
            case: None,
            zeta: None,
            eta: None,
            noise_norm: None,
            regime: None,
            error: None,
            sigma_s: None,
            mu: None,
            xi: None,
            sv_deviation: None,
            sv_min: None,
            sv_max: None,
            eta_opt: None,
            eta_cv: None,
            objective: None,
            feasibility: None,
            iterations: None,
            converged: None,
            failure: None,
            wall_time_s: 0.0,
        }
    }

    /// Sets `eta`, `noise_norm` and the matching regime label.
    pub fn with_noise(mut self, noise_norm: f64, eta: f64) -> Self {
        self.noise_norm = Some(noise_norm);
        self.eta = Some(eta);
        self.regime = Some(Regime::classify(noise_norm, eta));
        self
    }

    fn sort_key(&self) -> (usize, usize, &str, Option<&str>, u64) {
        (
            self.grid_index,
            self.trial,
            self.system.as_str(),
            self.case.as_deref(),
            self.eta.map_or(0, f64::to_bits),
        )
    }
}

/// Canonical record order: grid point, trial, system, case, eta.
pub fn canonical_sort(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub const CSV_COLUMNS: [&str; 26] = [
    "experiment",
    "grid_index",
    "trial",
    "seed",
    "system",
    "n",
    "m",
    "case",
    "zeta",
    "eta",
    "noise_norm",
    "regime",
    "error",
    "sigma_s",
    "mu",
    "xi",
    "sv_deviation",
    "sv_min",
    "sv_max",
    "eta_opt",
    "eta_cv",
    "objective",
    "feasibility",
    "iterations",
    "converged",
    "failure",
];

fn header_comment() -> String {
    format!(
        "# cslab records v1; columns: {}; empty cell = not applicable\n",
        CSV_COLUMNS.join(",")
    )
}

/// Writes the header comment line followed by the records as CSV.
pub fn write_records_csv<W: Write>(mut out: W, records: &[ExperimentRecord]) -> Result<(), ExperimentError> {
    out.write_all(header_comment().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if !first.starts_with("# cslab records v1") {
        return Err(ExperimentError::Format("missing record table header comment".into()));
    }
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(ExperimentError::from)).collect()
}

/// `grid_index,trial,system,case,wall_time_s` for every record.
pub fn write_timings_csv<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["grid_index", "trial", "system", "case", "wall_time_s"])?;
    for r in records {
        w.write_record([
            r.grid_index.to_string(),
            r.trial.to_string(),
            r.system.clone(),
            r.case.clone().unwrap_or_default(),
            format!("{:.6}", r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}
