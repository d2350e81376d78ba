//! Summary statistics for batch reports.

use rand::RngExt;
use serde::Serialize;

use crate::rng;

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().fold(0.0, |a, b| a + b) / values.len() as f64)
}

/// A two-sided interval around an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl Interval {
    pub fn excludes_zero_above(&self) -> bool {
        self.lower > 0.0
    }
}

/// Percentile bootstrap interval for the mean.
///
/// Returns `None` for an empty sample. Resampling is seeded, so the interval
/// is a pure function of its inputs.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, level: f64, seed: u64) -> Option<Interval> {
    let estimate = mean(values)?;
    let mut rng = rng::seeded(seed);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples.max(1))
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).fold(0.0, |a, b| a + b) / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let pick = |q: f64| {
        let idx = (q * (means.len() - 1) as f64).round() as usize;
        means[idx.min(means.len() - 1)]
    };
    Some(Interval { estimate, lower: pick(alpha), upper: pick(1.0 - alpha), level })
}

/// Bootstrap interval for the mean of the paired differences `a[i] - b[i]`.
pub fn paired_diff_ci(a: &[f64], b: &[f64], resamples: usize, level: f64, seed: u64) -> Option<Interval> {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    bootstrap_mean_ci(&diffs, resamples, level, seed)
}
