//! `cslab` — run the solver, the matrix diagnostics and the experiment suites.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 config/parse error,
//! 3 solver failure, 4 enumeration budget exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cslab_core::bos::{self, SamplingMode};
use cslab_core::experiments::{self, ExperimentConfig, ExperimentError, ExperimentId, ExperimentRun, SummaryBody};
use cslab_core::metrics::{self, ColumnEnsemble, MetricRecord, MetricsError};
use cslab_core::numerics::RngStream;
use cslab_core::solver::{PreparedOperator, SolverError, SolverOptions};

#[derive(Parser, Debug)]
#[command(name = "cslab", version, about = "Compressed-sensing laboratory: QCBP solver, sensing-matrix diagnostics and experiment suites")]
struct Cli {
    /// More progress output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only print errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve min |z|_1 s.t. |Az - y|_2 <= eta for serialized A and y.
    Solve(SolveArgs),
    /// Coherence, distortion, singular-value and RIP/NSP diagnostics.
    Metrics(MetricsArgs),
    /// Recovery error of BP/QCBP for Fourier and Gaussian matrices.
    Fig1(RunArgs),
    /// Cross-coherence of subsampled Fourier matrices against m^2/N.
    Fig2(RunArgs),
    /// Noise-level sweep for a tensor Chebyshev approximation problem.
    Fig3(RunArgs),
    /// Singular-value deviation against the coherence/distortion bound.
    SvCheck(RunArgs),
    /// Parse and validate an experiment config, then print it fully resolved.
    ValidateConfig {
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Sensing matrix file (cslab.sensing_matrix JSON).
    #[arg(long)]
    matrix: PathBuf,
    /// Measurement vector file (cslab.vector JSON).
    #[arg(long)]
    vector: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Solver options as JSON; unspecified fields keep their defaults.
    #[arg(long)]
    solver_config: Option<PathBuf>,
    /// Write report.json and the resolved solver options here instead of printing the report.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Diagnose a stored sensing matrix.
    #[arg(long, conflicts_with_all = ["system", "n", "m"])]
    matrix: Option<PathBuf>,
    /// Or sample fresh matrices from a system: fourier or chebyshev.
    #[arg(long, requires_all = ["n", "m"])]
    system: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value = "iid")]
    mode: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    coherence: bool,
    #[arg(long)]
    distortion: bool,
    #[arg(long)]
    sv_deviation: bool,
    /// Brute-force RIP constant of this order (stored matrix only).
    #[arg(long, value_name = "S")]
    rip: Option<usize>,
    /// NSP sufficiency check of this order via delta_2s (stored matrix only).
    #[arg(long, value_name = "S")]
    nsp: Option<usize>,
    /// Robustness coefficient of this order (stored matrix only).
    #[arg(long, value_name = "S")]
    robustness: Option<usize>,
    /// Maximum number of supports the RIP enumeration may visit.
    #[arg(long)]
    budget: Option<u128>,
    #[command(flatten)]
    threads: ThreadArgs,
    /// Write metrics.json here instead of printing.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment config (JSON); defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Defaults to the config's output_dir, else results/<experiment>.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[command(flatten)]
    threads: ThreadArgs,
}

#[derive(Args, Debug)]
struct ThreadArgs {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Solver(String),
    Budget(String),
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Budget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Solver(m) | CliError::Budget(m) | CliError::Other(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Bos(_) | SolverError::InvalidInput(_) => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            MetricsError::InvalidInput(_) | MetricsError::Bos(_) => CliError::Config(e.to_string()),
            MetricsError::Linalg(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidConfig { .. } | ExperimentError::Json(_) | ExperimentError::Bos(_) => {
                CliError::Config(e.to_string())
            }
            ExperimentError::Solver(e) => e.into(),
            ExperimentError::Metrics(e) => e.into(),
            other => CliError::Other(other.to_string()),
        }
    }
}

struct Log {
    level: i8,
}

impl Log {
    fn info(&self, msg: impl AsRef<str>) {
        if self.level >= 0 {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn debug(&self, msg: impl AsRef<str>) {
        if self.level >= 1 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log {
        level: if cli.quiet { -1 } else { cli.verbose as i8 },
    };
    match dispatch(cli.command, &log) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command, log: &Log) -> Result<(), CliError> {
    match command {
        Command::Solve(args) => solve(args, log),
        Command::Metrics(args) => run_metrics(args, log),
        Command::Fig1(args) => run(ExperimentId::Fig1, args, log),
        Command::Fig2(args) => run(ExperimentId::Fig2, args, log),
        Command::Fig3(args) => run(ExperimentId::Fig3, args, log),
        Command::SvCheck(args) => run(ExperimentId::SvCheck, args, log),
        Command::ValidateConfig { config } => {
            let cfg = load_config(&config)?;
            cfg.validate()?;
            println!("{}", cfg.to_json());
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn configure_threads(args: &ThreadArgs, log: &Log) -> Result<(), CliError> {
    let Some(threads) = args.threads else { return Ok(()) };
    if threads == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    if threads > 1 {
        log.info("built without the `parallel` feature; running sequentially");
    }
    log.debug(format!("threads: {threads}"));
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn solve(args: SolveArgs, log: &Log) -> Result<(), CliError> {
    let a = bos::io::read_matrix(&args.matrix).map_err(|e| CliError::Config(format!("{}: {e}", args.matrix.display())))?;
    let y = bos::io::read_vector(&args.vector).map_err(|e| CliError::Config(format!("{}: {e}", args.vector.display())))?;
    let options: SolverOptions = match &args.solver_config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => SolverOptions::default(),
    };
    options.validate()?;
    if y.len() != a.rows() {
        return Err(CliError::Config(format!(
            "vector has length {} but the matrix has {} rows",
            y.len(),
            a.rows()
        )));
    }
    let op = PreparedOperator::new(a.matrix(), options)?;
    let report = op.solve(&y, args.eta)?;
    log.info(format!(
        "objective {:.10e}  feasibility residual {:.3e} (eta {:e})  iterations {}  converged {}",
        report.objective, report.feasibility_residual, report.eta, report.iterations, report.converged
    ));
    match args.output_dir {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            write_json(&dir.join("solver_options.json"), &options)?;
            write_json(&dir.join("report.json"), &report)?;
            log.info(format!("wrote {}", dir.join("report.json").display()));
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn run_metrics(args: MetricsArgs, log: &Log) -> Result<(), CliError> {
    configure_threads(&args.threads, log)?;
    let mut records = Vec::new();
    let (ensemble, stored) = match (&args.matrix, &args.system) {
        (Some(path), _) => {
            let a = bos::io::read_matrix(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            (ColumnEnsemble::from_sensing(&a), Some(a))
        }
        (None, Some(name)) => {
            let (n, m) = (args.n.unwrap_or(0), args.m.unwrap_or(0));
            let system = match name.as_str() {
                "fourier" => bos::fourier_system(n),
                "chebyshev" => bos::chebyshev_system(n),
                other => return Err(CliError::Config(format!("unknown system `{other}` (fourier | chebyshev)"))),
            }
            .map_err(|e| CliError::Config(e.to_string()))?;
            let mode: SamplingMode = args.mode.parse().map_err(|e| CliError::Config(format!("--mode: {e}")))?;
            let rng = RngStream::new(args.seed, 0);
            (ColumnEnsemble::sampled(&system, m, mode, &rng, args.trials)?, None)
        }
        (None, None) => return Err(CliError::Config("either --matrix or --system/--n/--m is required".into())),
    };
    let seed = stored.is_none().then_some(args.seed);
    let tag = |r: MetricRecord| -> MetricRecord {
        let r = r.with("n", ensemble.n()).with("m", ensemble.m());
        match (&args.system, &args.matrix) {
            (Some(s), _) => r.with("system", s).with("mode", &args.mode),
            (_, Some(p)) => r.with("matrix", p.display().to_string()),
            _ => r,
        }
    };
    if args.coherence {
        records.push(tag(MetricRecord::from_estimate("cross_coherence", &metrics::cross_coherence(&ensemble)?, seed)));
    }
    if args.distortion {
        records.push(tag(MetricRecord::from_estimate("distortion", &metrics::distortion(&ensemble)?, seed)));
    }
    if args.sv_deviation {
        records.push(tag(MetricRecord::from_estimate("sv_deviation", &metrics::sv_deviation(&ensemble)?, seed)));
    }
    let needs_matrix = args.rip.is_some() || args.nsp.is_some() || args.robustness.is_some();
    if needs_matrix {
        let a = stored
            .as_ref()
            .ok_or_else(|| CliError::Config("--rip, --nsp and --robustness need --matrix".into()))?;
        if let Some(s) = args.rip {
            let report = match args.budget {
                Some(budget) => metrics::rip_bruteforce_with_budget(a.matrix(), s, budget)?,
                None => metrics::rip_bruteforce(a, s)?,
            };
            log.debug(format!("rip: {} supports checked", report.supports_checked));
            records.push(
                tag(MetricRecord::new("rip_constant", report.delta))
                    .with("s", s)
                    .with("support", &report.support)
                    .with("supports_checked", report.supports_checked),
            );
        }
        if let Some(s) = args.nsp {
            let report = metrics::nsp_sufficiency(a, s)?;
            records.push(
                tag(MetricRecord::new("nsp_sufficiency", report.delta_2s.unwrap_or(f64::NAN)))
                    .with("s", s)
                    .with("threshold", report.threshold)
                    .with("verdict", report.verdict),
            );
        }
        if let Some(s) = args.robustness {
            records.push(tag(MetricRecord::new("robustness_coefficient", metrics::robustness_coefficient(a, s)?)).with("s", s));
        }
    }
    if records.is_empty() {
        return Err(CliError::Config(
            "no quantity requested (--coherence, --distortion, --sv-deviation, --rip, --nsp, --robustness)".into(),
        ));
    }
    match args.output_dir {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            write_json(&dir.join("metrics.json"), &records)?;
            log.info(format!("wrote {}", dir.join("metrics.json").display()));
        }
        None => println!("{}", serde_json::to_string_pretty(&records)?),
    }
    Ok(())
}

fn run(id: ExperimentId, args: RunArgs, log: &Log) -> Result<(), CliError> {
    configure_threads(&args.threads, log)?;
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default_for(id),
    };
    if cfg.id() != id {
        return Err(CliError::Config(format!(
            "config describes experiment `{}` but the subcommand is `{id}`",
            cfg.id()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    let dir = args
        .output_dir
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results").join(id.as_str()));
    cfg.output_dir = Some(dir.clone());
    cfg.validate()?;
    log.debug(cfg.to_json());
    log.info(format!("running {id} (seed {}, {} trials)", cfg.seed, cfg.trials));
    let run = experiments::run_experiment(&cfg)?;
    let paths = experiments::write_outputs(&dir, &run)?;
    log.info(headline(&run));
    for p in paths {
        log.info(format!("wrote {}", p.display()));
    }
    Ok(())
}

fn headline(run: &ExperimentRun) -> String {
    let s = &run.summary;
    let detail = match &s.body {
        SummaryBody::Fig1(b) => format!("{} groups", b.groups.len()),
        SummaryBody::Fig2(b) => format!(
            "{} grid points, N mu <= m^2 everywhere: {}, max xi {:.2e}",
            b.points.len(),
            b.all_hold,
            b.max_xi
        ),
        SummaryBody::Fig3(b) => format!("{} noise levels, {} (trial, zeta) pairs", b.curves.len(), b.trials.len()),
        SummaryBody::SvCheck(b) => match (b.fitted_constant, b.ratio_spread) {
            (Some(c), Some(r)) => format!("{} points, C = {c:.3}, spread {r:.2}", b.points.len()),
            _ => format!("{} points, no non-degenerate point", b.points.len()),
        },
    };
    format!("{}: {} records, {} failures; {detail}", s.experiment, s.records, s.failures)
}
