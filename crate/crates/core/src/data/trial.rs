use serde::{Deserialize, Serialize};

use super::{kmeans_lots, gen_capacities, project_to_plane, DataError, RawTrip, Region};
use crate::model::{Instance, Lot, Trip};
use crate::rng::{self, streams};

/// 5 km/h expressed in miles per hour.
pub const DEFAULT_WALKING_SPEED_MPH: f64 = 5.0 / 1.609_344;

const SECONDS_PER_DAY: f64 = 86_400.0;

/// How source timestamps become periods of the simulated day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeMapping {
    /// `stretch` when the source pickups span less than 20 hours, else `day-clock`.
    #[default]
    Auto,
    /// Time of day of the pickup; trip durations are kept.
    DayClock,
    /// Pickups are mapped linearly from the source window onto the whole day,
    /// preserving order; trip durations are kept and the end is clipped to the
    /// last period.
    Stretch,
}

impl TimeMapping {
    pub fn resolve(self, trips: &[RawTrip]) -> TimeMapping {
        match self {
            TimeMapping::Auto => {
                let (lo, hi) = window(trips);
                if hi - lo < 20.0 * 3600.0 {
                    TimeMapping::Stretch
                } else {
                    TimeMapping::DayClock
                }
            }
            other => other,
        }
    }

    pub fn rule_name(self) -> &'static str {
        match self {
            TimeMapping::Auto => "auto",
            TimeMapping::DayClock => "day-clock",
            TimeMapping::Stretch => "linear-stretch-keep-duration",
        }
    }
}

fn window(trips: &[RawTrip]) -> (f64, f64) {
    trips.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
        (lo.min(t.pickup_time), hi.max(t.pickup_time))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialConfig {
    pub n_drivers: usize,
    pub n_lots: usize,
    pub horizon: u32,
    pub seed: u64,
    pub region: Region,
    /// Distance units (miles) per hour.
    pub walking_speed: f64,
    pub time_mapping: TimeMapping,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            n_drivers: 100,
            n_lots: 10,
            horizon: 24,
            seed: 0,
            region: Region::NYC,
            walking_speed: DEFAULT_WALKING_SPEED_MPH,
            time_mapping: TimeMapping::Auto,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.n_drivers == 0 || self.n_lots == 0 {
            return Err(DataError::Config("n_drivers and n_lots must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(DataError::Config("horizon must be at least 1".into()));
        }
        self.region.validate()
    }
}

fn period(seconds_into_day: f64, horizon: u32) -> u32 {
    let len = SECONDS_PER_DAY / f64::from(horizon);
    let p = (seconds_into_day / len).floor();
    (p.max(0.0) as u32 + 1).min(horizon)
}

/// Builds one trial instance from a pool of raw trips.
///
/// Drivers are drawn uniformly without replacement (kept in pool order),
/// projected about the region center and binned into periods; lots sit at the
/// k-means centroids of the sampled destinations with generated capacities.
pub fn sample_trial(raw: &[RawTrip], config: &TrialConfig) -> Result<Instance, DataError> {
    config.validate()?;
    if raw.len() < config.n_drivers {
        return Err(DataError::InsufficientTrips { needed: config.n_drivers, available: raw.len() });
    }
    let mut sample_rng = rng::seeded(rng::derive_seed(config.seed, streams::SAMPLE));
    let mut picked = rand::seq::index::sample(&mut sample_rng, raw.len(), config.n_drivers).into_vec();
    picked.sort_unstable();
    let chosen: Vec<RawTrip> = picked.iter().map(|&i| raw[i]).collect();

    let mapping = config.time_mapping.resolve(raw);
    let (w0, w1) = window(raw);
    let planar = project_to_plane(&chosen, &config.region);
    let trips: Vec<Trip> = planar
        .iter()
        .enumerate()
        .map(|(id, p)| {
            let start = match mapping {
                TimeMapping::Stretch if w1 > w0 => (p.start_time - w0) / (w1 - w0) * SECONDS_PER_DAY,
                TimeMapping::Stretch => 0.0,
                _ => p.start_time.rem_euclid(SECONDS_PER_DAY),
            };
            let end = start + (p.end_time - p.start_time);
            Trip {
                id,
                origin: p.origin,
                destination: p.destination,
                start_period: period(start, config.horizon),
                end_period: period(end, config.horizon),
            }
        })
        .collect();

    let destinations: Vec<_> = trips.iter().map(|t| t.destination).collect();
    let centers = kmeans_lots(&destinations, config.n_lots, rng::derive_seed(config.seed, streams::KMEANS))?;
    let caps = gen_capacities(config.n_drivers, config.n_lots, rng::derive_seed(config.seed, streams::CAPACITY));
    let lots = centers
        .into_iter()
        .zip(caps)
        .enumerate()
        .map(|(id, (location, (capacity, initial_occupancy)))| Lot { id, location, capacity, initial_occupancy })
        .collect();
    Ok(Instance::new(trips, lots, config.horizon, config.walking_speed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periods_floor_and_clip() {
        assert_eq!(period(0.0, 24), 1);
        assert_eq!(period(3599.0, 24), 1);
        assert_eq!(period(3600.0, 24), 2);
        assert_eq!(period(86_399.0, 24), 24);
        assert_eq!(period(90_000.0, 24), 24);
    }

    #[test]
    fn walking_speed_is_five_kmh() {
        assert!((DEFAULT_WALKING_SPEED_MPH * 1.609_344 - 5.0).abs() < 1e-12);
    }
}
