//! WebAssembly bindings for the demo page in `www/`. Each export returns a
//! JSON string for the page to draw.

use fairpark::algos::{run_method, Method, MinEnvyParams};
use fairpark::data::{sample_trial, synthetic_trips, SynthConfig, TrialConfig};
use fairpark::experiment::{run_batch, run_smartpark_compare, BatchConfig, CompareConfig, Grid};
use fairpark::fairness::{to_minutes, MetricReport};
use fairpark::rng::{self, streams};
use serde_json::json;
use wasm_bindgen::prelude::*;

const POOL_TRIPS: usize = 2000;

fn method(name: &str) -> Result<Method, String> {
    Method::ALL.into_iter().find(|m| m.name() == name).ok_or_else(|| format!("unknown method {name:?}"))
}

fn pool(seed: u32) -> Vec<fairpark::data::RawTrip> {
    let config = SynthConfig { n_trips: POOL_TRIPS, ..Default::default() };
    synthetic_trips(&config, rng::derive_seed(u64::from(seed), streams::SYNTH))
}

/// One synthetic instance solved by `method_name`: lot and driver geometry
/// plus the assignment and its metrics.
pub fn solve_json(seed: u32, n_drivers: u32, n_lots: u32, method_name: &str, epsilon: f64) -> Result<String, String> {
    let method = method(method_name)?;
    let config = TrialConfig {
        n_drivers: n_drivers as usize,
        n_lots: n_lots as usize,
        seed: u64::from(seed),
        ..Default::default()
    };
    let instance = sample_trial(&pool(seed), &config).map_err(|e| e.to_string())?;
    let params = MinEnvyParams { epsilon, ..Default::default() };
    let (assignment, trace) = run_method(&instance, method, &params).map_err(|e| e.to_string())?;
    let report = MetricReport::from_beta(&assignment.beta).map_err(|e| e.to_string())?;
    let lots: Vec<_> = instance
        .lots()
        .iter()
        .map(|l| json!({"x": l.location.x, "y": l.location.y, "capacity": l.capacity, "initial": l.initial_occupancy}))
        .collect();
    let drivers: Vec<_> = instance
        .trips()
        .iter()
        .zip(&assignment.dest_lot)
        .zip(&assignment.beta)
        .map(|((t, &lot), &b)| json!({"x": t.destination.x, "y": t.destination.y, "lot": lot, "walk_minutes": to_minutes(b)}))
        .collect();
    let progress: Vec<_> = trace
        .iter()
        .flat_map(|t| t.records())
        .map(|r| json!({"iter": r.iter, "F_minutes": to_minutes(r.mean_envy), "H_minutes": to_minutes(r.mean_walk)}))
        .collect();
    Ok(json!({
        "method": method.name(),
        "lots": lots,
        "drivers": drivers,
        "mean_envy_minutes": to_minutes(report.mean_envy),
        "mean_walk_minutes": to_minutes(report.mean_walk),
        "jains": report.jains,
        "trace": progress,
    })
    .to_string())
}

/// Exceedance curves of mean envy (minutes) for every method over a batch.
pub fn exceedance_json(seed: u32, trials: u32, n_drivers: u32, n_lots: u32) -> Result<String, String> {
    let config = BatchConfig {
        trials: trials as usize,
        seed: u64::from(seed),
        trial: TrialConfig { n_drivers: n_drivers as usize, n_lots: n_lots as usize, ..Default::default() },
        grid: Grid { min: Some(0.0), max: None, points: 61 },
        bootstrap_resamples: 500,
        ..Default::default()
    };
    let report = run_batch(&pool(seed), &config).map_err(|e| e.to_string())?;
    Ok(json!({
        "curves": report.summary.exceedance_f_minutes,
        "methods": report.summary.methods,
        "improvements": report.summary.improvements,
        "failed_trials": report.summary.failed_trials,
    })
    .to_string())
}

/// Utility versus fair dynamic allocation over generated scenarios.
pub fn compare_json(seed: u32, trials: u32) -> Result<String, String> {
    let config = CompareConfig { trials: trials as usize, seed: u64::from(seed), bootstrap_resamples: 500, ..Default::default() };
    let report = run_smartpark_compare(&config).map_err(|e| e.to_string())?;
    serde_json::to_string(&report.summary).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn solve(seed: u32, n_drivers: u32, n_lots: u32, method: &str, epsilon: f64) -> Result<String, JsValue> {
    solve_json(seed, n_drivers, n_lots, method, epsilon).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn exceedance(seed: u32, trials: u32, n_drivers: u32, n_lots: u32) -> Result<String, JsValue> {
    exceedance_json(seed, trials, n_drivers, n_lots).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn compare_smartpark(seed: u32, trials: u32) -> Result<String, JsValue> {
    compare_json(seed, trials).map_err(|e| JsValue::from_str(&e))
}
