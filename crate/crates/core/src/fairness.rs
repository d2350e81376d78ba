//! Walking time, envy and the scalar fairness metrics.
//!
//! All quantities are in hours. Walking time is L1 distance divided by the
//! walking speed, so the unit is distance-unit / (distance-unit per hour).

use serde::Serialize;
use thiserror::Error;

use crate::model::Point;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("metric undefined for an empty driver set")]
    Empty,
    #[error("walking speed must be positive and finite (got {0})")]
    WalkingSpeed(f64),
    #[error("negative target mean {0}")]
    NegativeTarget(f64),
    #[error("band half-width must be positive (got {0})")]
    Epsilon(f64),
}

pub fn walking_time(destination: &Point, lot: &Point, walking_speed: f64) -> Result<f64, MetricError> {
    if !(walking_speed.is_finite() && walking_speed > 0.0) {
        return Err(MetricError::WalkingSpeed(walking_speed));
    }
    Ok(destination.l1(lot) / walking_speed)
}

pub fn envy(beta_a: f64, beta_b: f64) -> f64 {
    (beta_a - beta_b).abs()
}

/// Mean envy over all ordered driver pairs, diagonal included.
///
/// Sorting turns the pairwise sum into a sum over consecutive gaps: the gap
/// between ranks `k` and `k+1` separates `k * (n - k)` unordered pairs. All
/// terms are nonnegative, so equal inputs give exactly zero.
pub fn mean_envy(beta: &[f64]) -> Result<f64, MetricError> {
    if beta.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut sorted = beta.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let unordered: f64 = sorted
        .windows(2)
        .enumerate()
        .map(|(k, w)| (w[1] - w[0]) * ((k + 1) * (n - k - 1)) as f64)
        .fold(0.0, |acc, v| acc + v);
    let nf = n as f64;
    Ok(2.0 * unordered / (nf * nf))
}

pub fn mean_walk(beta: &[f64]) -> Result<f64, MetricError> {
    if beta.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(beta.iter().sum::<f64>() / beta.len() as f64)
}

/// Absolute deviation from `target_mean`, summed over drivers outside `excluded`.
///
/// `excluded` is a per-driver membership mask; an empty slice excludes nobody.
pub fn objective_g(beta: &[f64], target_mean: f64, excluded: &[bool]) -> Result<f64, MetricError> {
    if target_mean.is_nan() || target_mean < 0.0 {
        return Err(MetricError::NegativeTarget(target_mean));
    }
    Ok(beta
        .iter()
        .enumerate()
        .filter(|(r, _)| !excluded.get(*r).copied().unwrap_or(false))
        .map(|(_, b)| (b - target_mean).abs())
        .fold(0.0, |acc, v| acc + v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Jains {
    Defined(f64),
    /// Every walking time is zero; the ratio is 0/0.
    Degenerate,
}

impl Jains {
    /// The index value, with 1 standing in for the degenerate case.
    pub fn value(self) -> f64 {
        match self {
            Jains::Defined(v) => v,
            Jains::Degenerate => 1.0,
        }
    }
}

pub fn jains_index(beta: &[f64]) -> Result<Jains, MetricError> {
    if beta.is_empty() {
        return Err(MetricError::Empty);
    }
    let sum: f64 = beta.iter().sum();
    let sum_sq: f64 = beta.iter().map(|b| b * b).sum();
    if sum_sq == 0.0 {
        return Ok(Jains::Degenerate);
    }
    let n = beta.len() as f64;
    Ok(Jains::Defined((sum * sum / (n * sum_sq)).clamp(1.0 / n, 1.0)))
}

/// Drivers whose walking time lies in `[(1-eps)H, (1+eps)H]`, endpoints included.
pub fn select_band(beta: &[f64], epsilon: f64) -> Result<Vec<bool>, MetricError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(MetricError::Epsilon(epsilon));
    }
    if beta.is_empty() {
        return Ok(Vec::new());
    }
    let mean = mean_walk(beta)?;
    let lo = (1.0 - epsilon) * mean;
    let hi = (1.0 + epsilon) * mean;
    Ok(beta.iter().map(|&b| lo <= b && b <= hi).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub mean_envy: f64,
    pub mean_walk: f64,
    pub jains: f64,
    pub jains_degenerate: bool,
    pub per_driver_beta: Vec<f64>,
}

impl MetricReport {
    pub fn from_beta(beta: &[f64]) -> Result<Self, MetricError> {
        let jains = jains_index(beta)?;
        Ok(Self {
            mean_envy: mean_envy(beta)?,
            mean_walk: mean_walk(beta)?,
            jains: jains.value(),
            jains_degenerate: matches!(jains, Jains::Degenerate),
            per_driver_beta: beta.to_vec(),
        })
    }
}

pub const MINUTES_PER_HOUR: f64 = 60.0;

pub fn to_minutes(hours: f64) -> f64 {
    hours * MINUTES_PER_HOUR
}
