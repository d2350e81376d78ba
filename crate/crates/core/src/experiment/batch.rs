use serde::{Deserialize, Serialize};

use super::curves::{relative_gain, relative_improvement, summarize_improvement, Curves, Grid, ImprovementBase, ImprovementSummary};
use super::ExperimentError;
use crate::algos::{run_method, IterationTrace, Method, MinEnvyParams};
use crate::data::{sample_trial, RawTrip, TrialConfig};
use crate::fairness::{jains_index, mean_envy, mean_walk, to_minutes};
use crate::model::check_feasible;
use crate::rng::{self, streams};
use crate::stats::mean;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchConfig {
    pub trials: usize,
    /// Master seed; trial `t` uses a seed derived from it and `t`.
    pub seed: u64,
    /// Shape of every trial; its `seed` field is replaced per trial.
    pub trial: TrialConfig,
    pub algorithm: MinEnvyParams,
    pub methods: Vec<Method>,
    pub improvement_base: ImprovementBase,
    pub grid: Grid,
    pub bootstrap_resamples: usize,
    pub confidence: f64,
    /// Record wall-clock runtime per row. Off by default so reports are
    /// byte-reproducible.
    pub timings: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            trials: 500,
            seed: 0,
            trial: TrialConfig::default(),
            algorithm: MinEnvyParams::default(),
            methods: Method::ALL.to_vec(),
            improvement_base: ImprovementBase::Ours,
            grid: Grid::default(),
            bootstrap_resamples: 2000,
            confidence: 0.95,
            timings: false,
        }
    }
}

impl BatchConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.trial.validate()?;
        self.algorithm.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        if self.methods.is_empty() {
            return Err(ExperimentError::Config("at least one method is required".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(ExperimentError::Config(format!("confidence {} outside (0, 1)", self.confidence)));
        }
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        rng::derive_seed(self.seed, trial as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    Failed,
}

/// One (trial, method) outcome. Metric fields are `None` on failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    pub status: RowStatus,
    pub f_minutes: Option<f64>,
    pub h_minutes: Option<f64>,
    pub jains: Option<f64>,
    pub iterations: Option<usize>,
    pub feasible: Option<bool>,
    pub runtime_ms: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub n: usize,
    pub mean_f_minutes: Option<f64>,
    pub mean_h_minutes: Option<f64>,
    pub mean_jains: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub trials: usize,
    pub failed_trials: usize,
    pub time_mapping: String,
    pub methods: Vec<MethodSummary>,
    pub improvements: Vec<ImprovementSummary>,
    pub exceedance_f_minutes: Curves,
    pub exceedance_jains: Curves,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub config: BatchConfig,
    pub rows: Vec<TrialRow>,
    /// Min-envy traces by trial.
    pub traces: Vec<(usize, IterationTrace)>,
    pub summary: BatchSummary,
}

impl BatchReport {
    /// Metric values of `method` over trials where every method succeeded.
    pub fn paired(&self, method: Method, metric: impl Fn(&TrialRow) -> Option<f64>) -> Vec<f64> {
        complete_trials(&self.rows, &self.config.methods)
            .into_iter()
            .filter_map(|t| self.rows.iter().find(|r| r.trial == t && r.method == method).and_then(&metric))
            .collect()
    }
}

struct TrialOutput {
    rows: Vec<TrialRow>,
    trace: Option<IterationTrace>,
}

#[cfg(not(target_arch = "wasm32"))]
fn clock() -> Option<std::time::Instant> {
    Some(std::time::Instant::now())
}

#[cfg(target_arch = "wasm32")]
fn clock() -> Option<std::time::Instant> {
    None
}

fn failed(trial: usize, seed: u64, method: Method, error: String) -> TrialRow {
    TrialRow {
        trial,
        seed,
        method,
        status: RowStatus::Failed,
        f_minutes: None,
        h_minutes: None,
        jains: None,
        iterations: None,
        feasible: None,
        runtime_ms: None,
        error: Some(error),
    }
}

fn run_trial(pool: &[RawTrip], config: &BatchConfig, trial: usize) -> TrialOutput {
    let seed = config.trial_seed(trial);
    let trial_config = TrialConfig { seed, ..config.trial.clone() };
    let instance = match sample_trial(pool, &trial_config) {
        Ok(i) => i,
        Err(e) => {
            let rows = config.methods.iter().map(|&m| failed(trial, seed, m, e.to_string())).collect();
            return TrialOutput { rows, trace: None };
        }
    };
    let mut rows = Vec::with_capacity(config.methods.len());
    let mut kept_trace = None;
    for &method in &config.methods {
        let start = config.timings.then(clock).flatten();
        let (assignment, trace) = match run_method(&instance, method, &config.algorithm) {
            Ok(out) => out,
            Err(e) => {
                rows.push(failed(trial, seed, method, e.to_string()));
                continue;
            }
        };
        let runtime_ms = start.map(|s| s.elapsed().as_secs_f64() * 1e3);
        let beta = &assignment.beta;
        let metrics = (|| Some((mean_envy(beta).ok()?, mean_walk(beta).ok()?, jains_index(beta).ok()?.value())))();
        let Some((f, h, j)) = metrics else {
            rows.push(failed(trial, seed, method, "metrics undefined for an empty instance".into()));
            continue;
        };
        rows.push(TrialRow {
            trial,
            seed,
            method,
            status: RowStatus::Ok,
            f_minutes: Some(to_minutes(f)),
            h_minutes: Some(to_minutes(h)),
            jains: Some(j),
            iterations: trace.as_ref().map(|t| t.iterations.len()),
            feasible: Some(check_feasible(&instance, &assignment).is_feasible()),
            runtime_ms,
            error: None,
        });
        if trace.is_some() {
            kept_trace = trace;
        }
    }
    TrialOutput { rows, trace: kept_trace }
}

fn complete_trials(rows: &[TrialRow], methods: &[Method]) -> Vec<usize> {
    let mut trials: Vec<usize> = rows.iter().map(|r| r.trial).collect();
    trials.dedup();
    trials
        .into_iter()
        .filter(|&t| {
            methods.iter().all(|&m| rows.iter().any(|r| r.trial == t && r.method == m && r.status == RowStatus::Ok))
        })
        .collect()
}

fn summarize(config: &BatchConfig, rows: &[TrialRow], time_mapping: String) -> BatchSummary {
    let complete = complete_trials(rows, &config.methods);
    let value = |t: usize, m: Method, f: &dyn Fn(&TrialRow) -> Option<f64>| {
        rows.iter().find(|r| r.trial == t && r.method == m).and_then(f)
    };
    let f_of = |r: &TrialRow| r.f_minutes;
    let j_of = |r: &TrialRow| r.jains;

    let methods = config
        .methods
        .iter()
        .map(|&m| {
            let ok: Vec<&TrialRow> = rows.iter().filter(|r| r.method == m && r.status == RowStatus::Ok).collect();
            let col = |f: fn(&TrialRow) -> Option<f64>| mean(&ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
            MethodSummary {
                method: m,
                n: ok.len(),
                mean_f_minutes: col(|r| r.f_minutes),
                mean_h_minutes: col(|r| r.h_minutes),
                mean_jains: col(|r| r.jains),
            }
        })
        .collect();

    let mut improvements = Vec::new();
    if config.methods.contains(&Method::MinEnvy) {
        for (k, &baseline) in config.methods.iter().filter(|&&m| m != Method::MinEnvy).enumerate() {
            let seed = rng::derive_seed(rng::derive_seed(config.seed, streams::BOOTSTRAP), k as u64);
            let f: Vec<Option<f64>> = complete
                .iter()
                .map(|&t| relative_improvement(value(t, Method::MinEnvy, &f_of)?, value(t, baseline, &f_of)?, config.improvement_base))
                .collect();
            improvements.push(summarize_improvement(
                ("min-envy", baseline.name(), "mean_envy", config.improvement_base.formula()),
                &f,
                config.bootstrap_resamples,
                config.confidence,
                seed,
            ));
            let j: Vec<Option<f64>> = complete
                .iter()
                .map(|&t| relative_gain(value(t, Method::MinEnvy, &j_of)?, value(t, baseline, &j_of)?))
                .collect();
            improvements.push(summarize_improvement(
                ("min-envy", baseline.name(), "jains", "(ours - baseline) / baseline"),
                &j,
                config.bootstrap_resamples,
                config.confidence,
                rng::derive_seed(seed, 1),
            ));
        }
    }

    let sample = |f: &dyn Fn(&TrialRow) -> Option<f64>| -> Vec<(String, Vec<f64>)> {
        config
            .methods
            .iter()
            .map(|&m| (m.name().to_string(), complete.iter().filter_map(|&t| value(t, m, f)).collect()))
            .collect()
    };
    let mut trials: Vec<usize> = rows.iter().map(|r| r.trial).collect();
    trials.dedup();
    BatchSummary {
        trials: trials.len(),
        failed_trials: trials.len() - complete.len(),
        time_mapping,
        methods,
        improvements,
        exceedance_f_minutes: Curves::build(&sample(&f_of), &config.grid),
        exceedance_jains: Curves::build(&sample(&j_of), &config.grid),
    }
}

/// Runs every configured method on `config.trials` trial instances drawn
/// from `pool`. A failing trial is recorded as failed rows and excluded
/// from the paired summaries.
pub fn run_batch(pool: &[RawTrip], config: &BatchConfig) -> Result<BatchReport, ExperimentError> {
    config.validate()?;
    let run = |t: usize| run_trial(pool, config, t);
    #[cfg(feature = "parallel")]
    let outputs: Vec<TrialOutput> = {
        use rayon::prelude::*;
        (0..config.trials).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outputs: Vec<TrialOutput> = (0..config.trials).map(run).collect();

    let mut rows = Vec::with_capacity(config.trials * config.methods.len());
    let mut traces = Vec::new();
    for (t, out) in outputs.into_iter().enumerate() {
        rows.extend(out.rows);
        if let Some(trace) = out.trace {
            traces.push((t, trace));
        }
    }
    let time_mapping = if pool.is_empty() { "none" } else { config.trial.time_mapping.resolve(pool).rule_name() };
    let summary = summarize(config, &rows, time_mapping.to_string());
    Ok(BatchReport { config: config.clone(), rows, traces, summary })
}
