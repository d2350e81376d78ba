//! Trip ingestion and trial instance generation.

mod capacity;
mod csv_trips;
mod kmeans;
mod projection;
mod source;
mod sumo;
mod synth;
mod trial;

pub use capacity::{gen_capacities, round_half_up_div};
pub use csv_trips::{parse_trip_csv, parse_trip_csv_reader, write_trip_csv, CsvSchema};
pub use kmeans::{assign_labels, kmeans_lots, within_cluster_ss};
pub use projection::{haversine_miles, project, project_to_plane, PlanarTrip, MILES_PER_DEGREE};
pub use source::DataSource;
pub use sumo::{parse_sumo_trips, parse_sumo_xml, SumoConfig};
pub use synth::{synthetic_trips, SynthConfig};
pub use trial::{sample_trial, TimeMapping, TrialConfig, DEFAULT_WALKING_SPEED_MPH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("configured column {0:?} not found in header")]
    MissingColumn(String),
    #[error("malformed trip XML: {0}")]
    Xml(String),
    #[error("need {needed} trips, only {available} available")]
    InsufficientTrips { needed: usize, available: usize },
    #[error("need {k} distinct points for clustering, found {distinct}")]
    TooFewPoints { k: usize, distinct: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

/// Longitude/latitude bounding box, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl Region {
    /// Manhattan and the adjoining parts of Brooklyn and Queens.
    pub const NYC: Region = Region { min_lon: -74.03, min_lat: 40.69, max_lon: -73.90, max_lat: 40.88 };
    /// Cologne city area.
    pub const COLOGNE: Region = Region { min_lon: 6.85, min_lat: 50.87, max_lon: 7.05, max_lat: 51.02 };

    pub fn validate(&self) -> Result<(), DataError> {
        let finite = [self.min_lon, self.min_lat, self.max_lon, self.max_lat].iter().all(|v| v.is_finite());
        if !finite || self.min_lon >= self.max_lon || self.min_lat >= self.max_lat {
            return Err(DataError::Config(format!("degenerate region {self:?}")));
        }
        if self.min_lat < -90.0 || self.max_lat > 90.0 {
            return Err(DataError::Config("latitude outside [-90, 90]".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: &GeoPoint) -> bool {
        (self.min_lon..=self.max_lon).contains(&p.lon) && (self.min_lat..=self.max_lat).contains(&p.lat)
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint { lon: 0.5 * (self.min_lon + self.max_lon), lat: 0.5 * (self.min_lat + self.max_lat) }
    }
}

impl Default for Region {
    fn default() -> Self {
        Region::NYC
    }
}

/// One trip record as ingested: times in seconds, positions in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawTrip {
    pub pickup_time: f64,
    pub dropoff_time: f64,
    pub pickup: GeoPoint,
    pub dropoff: GeoPoint,
}

/// Records kept plus the number of rows dropped as unusable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Parsed {
    pub trips: Vec<RawTrip>,
    pub dropped: usize,
}
