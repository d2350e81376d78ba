mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fairpark::algos::{run_method, Method, MinEnvyParams};
use fairpark::data::{sample_trial, DataError, DataSource, SumoConfig, TrialConfig};
use fairpark::experiment::{
    run_batch, run_smartpark_compare, write_batch, write_compare, BatchConfig, CompareConfig, ExperimentError,
};
use fairpark::fairness::{to_minutes, MetricReport};
use fairpark::model::{check_feasible, Instance};
use fairpark::rng::{self, streams};
use fairpark::smartpark::generate_scenario;
use thiserror::Error;

use crate::config::FileConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("bad config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("bad instance {path}: {message}")]
    Instance { path: PathBuf, message: String },
    #[error("{0}")]
    Run(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    MinEnvy,
    MinSum,
    NoScheme,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::MinEnvy => Method::MinEnvy,
            MethodArg::MinSum => Method::MinSum,
            MethodArg::NoScheme => Method::NoScheme,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fairpark", version, about = "Fair parking-lot assignment experiments")]
struct Cli {
    /// Master seed for sampling, synthesis and bootstrap.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML (or .json) config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Convergence tolerance on the mean walking time, hours.
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    maxiter: Option<u32>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn a trip dataset into trial instance files.
    Ingest {
        /// NYC-style trip CSV (overrides the configured source).
        #[arg(long, conflicts_with = "sumo")]
        csv: Option<String>,
        /// SUMO-style trip XML (overrides the configured source).
        #[arg(long)]
        sumo: Option<String>,
    },
    /// Run one method on one instance and print its metrics.
    Solve { instance: PathBuf },
    /// Run all methods over a batch of sampled trials.
    Batch,
    /// Compare utility and fair dynamic allocation on generated scenarios.
    CompareSmartpark,
    /// Write a synthetic instance (or dynamic scenario) as JSON.
    Gen {
        /// Generate a dynamic-allocation scenario instead of an instance.
        #[arg(long)]
        scenario: bool,
    },
}

struct Settings {
    file: FileConfig,
    seed: u64,
    trials: Option<usize>,
    method: Method,
    params: MinEnvyParams,
    out: Option<PathBuf>,
}

impl Settings {
    fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut params = file.algorithm;
        if let Some(e) = cli.epsilon {
            params.epsilon = e;
        }
        if let Some(d) = cli.delta {
            params.delta = d;
        }
        if let Some(m) = cli.maxiter {
            params.maxiter = m;
        }
        params.validate().map_err(|e| CliError::Run(e.to_string()))?;
        Ok(Self {
            seed: cli.seed.or(file.seed).unwrap_or(0),
            trials: cli.trials.or(file.trials),
            method: cli.method.map(Method::from).or(file.method).unwrap_or(Method::MinEnvy),
            out: cli.out.clone().or_else(|| file.out.clone()),
            params,
            file,
        })
    }

    fn out_dir(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    fn pool(&self, source: &DataSource) -> Result<fairpark::data::Parsed, CliError> {
        Ok(source.load(&self.file.trial.region, rng::derive_seed(self.seed, streams::SYNTH))?)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Write { path: parent.into(), source })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Write { path: path.into(), source })
}

fn ingest(s: &Settings, csv: Option<String>, sumo: Option<String>) -> Result<(), CliError> {
    let source = match (csv, sumo, &s.file.source) {
        (Some(path), _, DataSource::Csv { schema, .. }) => DataSource::Csv { path, schema: schema.clone() },
        (Some(path), _, _) => DataSource::Csv { path, schema: Default::default() },
        (None, Some(path), DataSource::Sumo { config, .. }) => DataSource::Sumo { path, config: config.clone() },
        (None, Some(path), _) => DataSource::Sumo { path, config: SumoConfig::default() },
        (None, None, configured) => configured.clone(),
    };
    let parsed = s.pool(&source)?;
    let dir = s.out_dir("instances");
    let trials = s.trials.unwrap_or(1);
    for t in 0..trials {
        let config = TrialConfig { seed: rng::derive_seed(s.seed, t as u64), ..s.file.trial.clone() };
        let instance = sample_trial(&parsed.trips, &config)?;
        write_file(&dir.join(format!("instance_{t:04}.json")), &instance.to_json())?;
    }
    let mapping = s.file.trial.time_mapping.resolve(&parsed.trips).rule_name();
    emit(
        &serde_json::json!({
            "trips": parsed.trips.len(),
            "dropped": parsed.dropped,
            "instances": trials,
            "time_mapping": mapping,
            "out": dir.display().to_string(),
        })
        .to_string(),
    )?;
    Ok(())
}

fn solve(s: &Settings, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let instance =
        Instance::from_json(&text).map_err(|e| CliError::Instance { path: path.into(), message: e.to_string() })?;
    let (assignment, trace) = run_method(&instance, s.method, &s.params).map_err(|e| CliError::Run(e.to_string()))?;
    let report = MetricReport::from_beta(&assignment.beta).map_err(|e| CliError::Run(e.to_string()))?;
    let output = serde_json::json!({
        "method": s.method.name(),
        "feasible": check_feasible(&instance, &assignment).is_feasible(),
        "mean_envy_minutes": to_minutes(report.mean_envy),
        "mean_walk_minutes": to_minutes(report.mean_walk),
        "jains": report.jains,
        "jains_degenerate": report.jains_degenerate,
        "iterations": trace.as_ref().map(|t| t.iterations.len()),
        "dest_lot": assignment.dest_lot,
        "beta_hours": report.per_driver_beta,
    });
    emit(&serde_json::to_string_pretty(&output).expect("json"))?;
    if let Some(dir) = &s.out {
        write_file(&dir.join("solution.json"), &serde_json::to_string_pretty(&output).expect("json"))?;
        if let Some(trace) = trace {
            write_file(&dir.join("trace.csv"), &trace.to_csv())?;
        }
    }
    Ok(())
}

fn batch(s: &Settings) -> Result<(), CliError> {
    let r = &s.file.report;
    let config = BatchConfig {
        trials: s.trials.unwrap_or(500),
        seed: s.seed,
        trial: s.file.trial.clone(),
        algorithm: s.params,
        methods: r.methods.clone(),
        improvement_base: r.improvement_base,
        grid: r.grid.clone(),
        bootstrap_resamples: r.bootstrap_resamples,
        confidence: r.confidence,
        timings: r.timings,
    };
    let pool = s.pool(&s.file.source)?;
    let report = run_batch(&pool.trips, &config)?;
    let dir = s.out_dir("results");
    write_batch(&report, &dir)?;
    for m in &report.summary.methods {
        emit(&format!(
            "{:<10} n={:<4} F={} min  H={} min  jains={}",
            m.method.name(),
            m.n,
            fmt(m.mean_f_minutes),
            fmt(m.mean_h_minutes),
            fmt(m.mean_jains)
        ))?;
    }
    for i in &report.summary.improvements {
        emit(&format!("{} over {} ({}): {} %", i.ours, i.baseline, i.metric, fmt(i.mean_pct)))?;
    }
    emit(&format!("wrote {}", dir.display()))?;
    Ok(())
}

fn compare(s: &Settings) -> Result<(), CliError> {
    let r = &s.file.report;
    let config = CompareConfig {
        trials: s.trials.unwrap_or(500),
        seed: s.seed,
        scenario: s.file.smartpark.clone(),
        algorithm: s.params,
        improvement_base: r.improvement_base,
        bootstrap_resamples: r.bootstrap_resamples,
        confidence: r.confidence,
    };
    let report = run_smartpark_compare(&config)?;
    let dir = s.out_dir("results");
    write_compare(&report, &dir)?;
    let sum = &report.summary;
    emit(&format!("Mean envy improvement: {} %", fmt(sum.mean_envy.mean_pct)))?;
    emit(&format!("Jain's index improvement: {} %", fmt(sum.jains.mean_pct)))?;
    emit(&format!("cost increases: {}, reservation overflows: {}", sum.cost_increases, sum.reservation_overflows))?;
    emit(&format!("wrote {}", dir.display()))?;
    Ok(())
}

fn gen(s: &Settings, scenario: bool) -> Result<(), CliError> {
    let (json, name) = if scenario {
        let sc = generate_scenario(&s.file.smartpark, s.seed).map_err(|e| CliError::Run(e.to_string()))?;
        (sc.to_json(), "scenario.json")
    } else {
        let pool = s.pool(&s.file.source)?;
        let config = TrialConfig { seed: s.seed, ..s.file.trial.clone() };
        (sample_trial(&pool.trips, &config)?.to_json(), "instance.json")
    };
    match &s.out {
        Some(dir) => write_file(&dir.join(name), &json),
        None => {
            emit(&json)
        }
    }
}

/// Prints a line; a closed stdout (e.g. piped into `head`) is not an error.
fn emit(line: &str) -> Result<(), CliError> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::Write { path: "<stdout>".into(), source: e })
        }
        _ => Ok(()),
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.3}"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(&cli)?;
    match cli.command {
        Command::Ingest { csv, sumo } => ingest(&settings, csv, sumo),
        Command::Solve { instance } => solve(&settings, &instance),
        Command::Batch => batch(&settings),
        Command::CompareSmartpark => compare(&settings),
        Command::Gen { scenario } => gen(&settings, scenario),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
