use std::path::{Path, PathBuf};

use fairpark::algos::{Method, MinEnvyParams};
use fairpark::data::{DataSource, TrialConfig};
use fairpark::experiment::{Grid, ImprovementBase};
use fairpark::smartpark::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Report options shared by `batch` and `compare-smartpark`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub methods: Vec<Method>,
    pub improvement_base: ImprovementBase,
    pub grid: Grid,
    pub bootstrap_resamples: usize,
    pub confidence: f64,
    pub timings: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            improvement_base: ImprovementBase::Ours,
            grid: Grid::default(),
            bootstrap_resamples: 2000,
            confidence: 0.95,
            timings: false,
        }
    }
}

/// The config file. Every key is optional; command-line flags win.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub method: Option<Method>,
    pub out: Option<PathBuf>,
    pub trial: TrialConfig,
    pub algorithm: MinEnvyParams,
    pub source: DataSource,
    pub report: ReportConfig,
    pub smartpark: ScenarioConfig,
}

impl FileConfig {
    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| CliError::Config { path: path.into(), message })
    }
}
