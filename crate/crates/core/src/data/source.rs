use serde::{Deserialize, Serialize};

use super::{parse_sumo_trips, parse_trip_csv, synthetic_trips, CsvSchema, DataError, Parsed, Region, SumoConfig, SynthConfig};

/// Where a batch draws its trip pool from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    Synthetic(SynthConfig),
    Csv {
        path: String,
        #[serde(default)]
        schema: CsvSchema,
    },
    Sumo {
        path: String,
        #[serde(default)]
        config: SumoConfig,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SynthConfig::default())
    }
}

impl DataSource {
    /// Loads the pool. `region` filters CSV rows; `seed` drives synthesis.
    pub fn load(&self, region: &Region, seed: u64) -> Result<Parsed, DataError> {
        match self {
            DataSource::Synthetic(config) => Ok(Parsed { trips: synthetic_trips(config, seed), dropped: 0 }),
            DataSource::Csv { path, schema } => parse_trip_csv(path, schema, region),
            DataSource::Sumo { path, config } => parse_sumo_trips(path, config),
        }
    }
}
