use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::stats::{bootstrap_mean_ci, Interval};

/// `(γ, P(value > γ))` for every γ of `grid`.
pub fn exceedance_curve(values: &[f64], grid: &[f64]) -> Result<Vec<(f64, f64)>, ExperimentError> {
    if values.is_empty() {
        return Err(ExperimentError::Empty);
    }
    let n = values.len() as f64;
    Ok(grid.iter().map(|&g| (g, values.iter().filter(|&&v| v > g).count() as f64 / n)).collect())
}

/// Evaluation points for exceedance curves. Missing bounds default to the
/// smallest and largest observed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { min: None, max: None, points: 101 }
    }
}

impl Grid {
    pub fn resolve(&self, values: &[f64]) -> Vec<f64> {
        if values.is_empty() && (self.min.is_none() || self.max.is_none()) {
            return Vec::new();
        }
        let lo = self.min.unwrap_or_else(|| values.iter().copied().fold(f64::INFINITY, f64::min));
        let hi = self.max.unwrap_or_else(|| values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        match self.points {
            0 => Vec::new(),
            1 => vec![lo],
            p => (0..p).map(|i| lo + (hi - lo) * i as f64 / (p - 1) as f64).collect(),
        }
    }
}

/// One exceedance curve per labelled sample on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curves {
    pub grid: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

impl Curves {
    pub fn build(samples: &[(String, Vec<f64>)], grid: &Grid) -> Self {
        let all: Vec<f64> = samples.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        let points = grid.resolve(&all);
        let series = samples
            .iter()
            .filter_map(|(name, v)| {
                let curve = exceedance_curve(v, &points).ok()?;
                Some((name.clone(), curve.into_iter().map(|(_, p)| p).collect()))
            })
            .collect();
        Self { grid: points, series }
    }
}

/// Denominator of a lower-is-better relative improvement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImprovementBase {
    /// `(baseline − ours) / ours`
    #[default]
    Ours,
    /// `(baseline − ours) / baseline`
    Baseline,
}

impl ImprovementBase {
    pub fn formula(self) -> &'static str {
        match self {
            ImprovementBase::Ours => "(baseline - ours) / ours",
            ImprovementBase::Baseline => "(baseline - ours) / baseline",
        }
    }
}

/// Percentage improvement of `ours` over `baseline` for a metric where lower
/// is better. Equal values give 0; a zero denominator gives `None`.
pub fn relative_improvement(ours: f64, baseline: f64, base: ImprovementBase) -> Option<f64> {
    if ours == baseline {
        return Some(0.0);
    }
    let denom = match base {
        ImprovementBase::Ours => ours,
        ImprovementBase::Baseline => baseline,
    };
    (denom != 0.0).then(|| 100.0 * (baseline - ours) / denom)
}

/// Percentage gain `(ours − baseline) / baseline` for a higher-is-better
/// metric. Equal values give 0; a zero baseline gives `None`.
pub fn relative_gain(ours: f64, baseline: f64) -> Option<f64> {
    if ours == baseline {
        return Some(0.0);
    }
    (baseline != 0.0).then(|| 100.0 * (ours - baseline) / baseline)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovementSummary {
    pub ours: String,
    pub baseline: String,
    pub metric: String,
    pub formula: String,
    /// Trials contributing to the mean.
    pub n: usize,
    /// Trials skipped because the denominator was zero.
    pub excluded: usize,
    pub mean_pct: Option<f64>,
    pub ci: Option<Interval>,
}

pub fn summarize_improvement(
    labels: (&str, &str, &str, &str),
    per_trial: &[Option<f64>],
    resamples: usize,
    level: f64,
    seed: u64,
) -> ImprovementSummary {
    let kept: Vec<f64> = per_trial.iter().flatten().copied().collect();
    let ci = bootstrap_mean_ci(&kept, resamples, level, seed);
    ImprovementSummary {
        ours: labels.0.into(),
        baseline: labels.1.into(),
        metric: labels.2.into(),
        formula: labels.3.into(),
        n: kept.len(),
        excluded: per_trial.len() - kept.len(),
        mean_pct: ci.map(|c| c.estimate),
        ci,
    }
}
