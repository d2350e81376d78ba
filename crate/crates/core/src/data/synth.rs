//! Synthetic trip pools for runs without a real dataset.
//!
//! Endpoints cluster around two families of hotspots ("home" and "work") with
//! a uniform background. Morning-peak trips run home to work, evening-peak
//! trips work to home, and off-peak trips pick either direction, so lots near
//! popular destinations fill faster than their own departures free them.
//! Over a short window pickups are uniform and directions random.

use rand::RngExt;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{GeoPoint, RawTrip, Region};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_trips: usize,
    pub region: Region,
    pub hotspots: usize,
    /// Standard deviation of hotspot scatter, degrees.
    pub spread_deg: f64,
    /// Share of endpoints drawn around hotspots rather than uniformly.
    pub hotspot_share: f64,
    /// Unix time of the start of the window.
    pub base_time: f64,
    pub window_hours: f64,
    pub min_duration_s: f64,
    pub max_duration_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_trips: 5000,
            region: Region::NYC,
            hotspots: 8,
            spread_deg: 0.006,
            hotspot_share: 0.7,
            base_time: 1_358_208_000.0,
            window_hours: 24.0,
            min_duration_s: 300.0,
            max_duration_s: 2700.0,
        }
    }
}

fn uniform_point(rng: &mut rng::Rng, r: &Region) -> GeoPoint {
    GeoPoint { lon: rng.random_range(r.min_lon..r.max_lon), lat: rng.random_range(r.min_lat..r.max_lat) }
}

fn endpoint(rng: &mut rng::Rng, config: &SynthConfig, hotspots: &[GeoPoint], scatter: &Normal<f64>) -> GeoPoint {
    let r = &config.region;
    if hotspots.is_empty() || rng.random::<f64>() >= config.hotspot_share {
        return uniform_point(rng, r);
    }
    let h = hotspots[rng.random_range(0..hotspots.len())];
    for _ in 0..32 {
        let p = GeoPoint { lon: h.lon + scatter.sample(rng), lat: h.lat + scatter.sample(rng) };
        if r.contains(&p) {
            return p;
        }
    }
    h
}

#[derive(Clone, Copy)]
enum Peak {
    Morning,
    Evening,
    Neither,
}

fn time_of_day(rng: &mut rng::Rng, morning: &Normal<f64>, evening: &Normal<f64>) -> (f64, Peak) {
    let u: f64 = rng.random();
    let (hours, peak) = if u < 0.35 {
        (morning.sample(rng), Peak::Morning)
    } else if u < 0.7 {
        (evening.sample(rng), Peak::Evening)
    } else {
        (rng.random_range(0.0..24.0), Peak::Neither)
    };
    (hours.rem_euclid(24.0) * 3600.0, peak)
}

pub fn synthetic_trips(config: &SynthConfig, seed: u64) -> Vec<RawTrip> {
    let mut rng = rng::seeded(seed);
    let r = &config.region;
    let inner = Region {
        min_lon: r.min_lon + 0.1 * (r.max_lon - r.min_lon),
        max_lon: r.max_lon - 0.1 * (r.max_lon - r.min_lon),
        min_lat: r.min_lat + 0.1 * (r.max_lat - r.min_lat),
        max_lat: r.max_lat - 0.1 * (r.max_lat - r.min_lat),
    };
    let hotspots: Vec<GeoPoint> = (0..config.hotspots).map(|_| uniform_point(&mut rng, &inner)).collect();
    let (home, work) = hotspots.split_at(hotspots.len() / 2);
    let scatter = Normal::new(0.0, config.spread_deg.max(1e-9)).expect("positive spread");
    let morning = Normal::new(8.5, 1.5).expect("valid");
    let evening = Normal::new(18.0, 2.0).expect("valid");
    let full_day = config.window_hours >= 24.0;
    (0..config.n_trips)
        .map(|_| {
            let (offset, peak) = if full_day {
                time_of_day(&mut rng, &morning, &evening)
            } else {
                (rng.random_range(0.0..config.window_hours.max(1e-6) * 3600.0), Peak::Neither)
            };
            let outbound = match peak {
                Peak::Morning => true,
                Peak::Evening => false,
                Peak::Neither => rng.random::<bool>(),
            };
            let (from, to) = if outbound { (home, work) } else { (work, home) };
            let pickup_time = (config.base_time + offset).floor();
            let duration = rng.random_range(config.min_duration_s..=config.max_duration_s).floor();
            RawTrip {
                pickup_time,
                dropoff_time: pickup_time + duration,
                pickup: endpoint(&mut rng, config, from, &scatter),
                dropoff: endpoint(&mut rng, config, to, &scatter),
            }
        })
        .collect()
}
