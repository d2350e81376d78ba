//! Random dynamic scenarios: lots on a planar grid, Poisson request
//! arrivals, uniform preference weights and per-lot prices.

use rand::RngExt;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{DriverRequest, ParkLot, Scenario, SmartParkError};
use crate::data::DEFAULT_WALKING_SPEED_MPH;
use crate::model::Point;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Distance between neighbouring lots, miles.
    pub grid_spacing: f64,
    pub horizon: u32,
    /// Mean number of requests per period.
    pub request_rate: f64,
    /// Periods between request and arrival, inclusive range.
    pub min_lead: u32,
    pub max_lead: u32,
    pub min_capacity: u32,
    pub max_capacity: u32,
    /// Share of initially parked vehicles that leave during the horizon.
    pub departure_share: f64,
    pub min_price: f64,
    pub max_price: f64,
    /// Quantile of a driver's prices and distances used as its limits.
    pub limit_quantile: f64,
    pub walking_speed: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            grid_rows: 3,
            grid_cols: 3,
            grid_spacing: 0.3,
            horizon: 24,
            request_rate: 2.0,
            min_lead: 1,
            max_lead: 4,
            min_capacity: 4,
            max_capacity: 8,
            departure_share: 0.5,
            min_price: 1.0,
            max_price: 6.0,
            limit_quantile: 0.95,
            walking_speed: DEFAULT_WALKING_SPEED_MPH,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SmartParkError> {
        let bad = |m: &str| Err(SmartParkError::Params(m.into()));
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return bad("grid needs at least one lot");
        }
        if !(self.grid_spacing > 0.0 && self.grid_spacing.is_finite()) {
            return bad("grid spacing must be positive");
        }
        if self.min_lead == 0 || self.min_lead > self.max_lead || self.horizon <= self.min_lead {
            return bad("need 1 <= min_lead <= max_lead < horizon");
        }
        if !(self.request_rate > 0.0 && self.request_rate.is_finite()) {
            return bad("request rate must be positive");
        }
        if self.min_capacity > self.max_capacity {
            return bad("min_capacity exceeds max_capacity");
        }
        if !(0.0..=1.0).contains(&self.departure_share) {
            return bad("departure share outside [0, 1]");
        }
        if !(self.min_price > 0.0 && self.min_price <= self.max_price && self.max_price.is_finite()) {
            return bad("need 0 < min_price <= max_price");
        }
        if !(self.limit_quantile > 0.0 && self.limit_quantile <= 1.0) {
            return bad("limit quantile outside (0, 1]");
        }
        if !(self.walking_speed > 0.0 && self.walking_speed.is_finite()) {
            return bad("walking speed must be positive");
        }
        Ok(())
    }
}

/// Linear-interpolation quantile of `values` (sorted in place).
fn quantile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let pos = q * (values.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    match values.get(i + 1) {
        Some(next) => values[i] + frac * (next - values[i]),
        None => values[i],
    }
}

pub fn generate_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario, SmartParkError> {
    config.validate()?;
    let mut rng = rng::seeded(seed);
    let h = config.horizon;
    let mut lots = Vec::with_capacity(config.grid_rows * config.grid_cols);
    for row in 0..config.grid_rows {
        for col in 0..config.grid_cols {
            let capacity = rng.random_range(config.min_capacity..=config.max_capacity);
            let lo = crate::data::round_half_up_div(capacity, 4);
            let hi = crate::data::round_half_up_div(3 * capacity, 4);
            let initial_occupancy = rng.random_range(lo..=hi);
            let mut departures = vec![0u32; h as usize];
            for _ in 0..initial_occupancy {
                if rng.random::<f64>() < config.departure_share {
                    departures[rng.random_range(0..h as usize)] += 1;
                }
            }
            lots.push(ParkLot {
                id: lots.len(),
                location: Point::new(col as f64 * config.grid_spacing, row as f64 * config.grid_spacing),
                capacity,
                initial_occupancy,
                departures,
            });
        }
    }
    let prices: Vec<f64> = lots.iter().map(|_| rng.random_range(config.min_price..=config.max_price)).collect();
    let max_money = quantile(&mut prices.clone(), config.limit_quantile);
    let pad = 0.5 * config.grid_spacing;
    let width = (config.grid_cols - 1) as f64 * config.grid_spacing + 2.0 * pad;
    let height = (config.grid_rows - 1) as f64 * config.grid_spacing + 2.0 * pad;

    let poisson = Poisson::new(config.request_rate).map_err(|e| SmartParkError::Params(e.to_string()))?;
    let mut drivers = Vec::new();
    for k in 1..=h - config.min_lead {
        let count = poisson.sample(&mut rng) as usize;
        for _ in 0..count {
            let destination = Point::new(rng.random_range(0.0..width) - pad, rng.random_range(0.0..height) - pad);
            let mut distances: Vec<f64> = lots.iter().map(|l| destination.l1(&l.location)).collect();
            let max_distance = quantile(&mut distances, config.limit_quantile).max(f64::MIN_POSITIVE);
            let lead = rng.random_range(config.min_lead..=config.max_lead);
            drivers.push(DriverRequest {
                id: drivers.len(),
                request_time: k,
                arrival_time: (k + lead).min(h),
                destination,
                lambda: rng.random_range(0.0..=1.0),
                monetary_cost: prices.clone(),
                max_money,
                max_distance,
            });
        }
    }
    let scenario = Scenario { horizon: h, walking_speed: config.walking_speed, lots, drivers };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&mut [3.0, 1.0, 2.0], 0.5), 2.0);
        assert!((quantile(&mut [0.0, 10.0], 0.95) - 9.5).abs() < 1e-12);
        assert_eq!(quantile(&mut [4.0], 0.95), 4.0);
    }

    #[test]
    fn generated_scenarios_are_valid_and_reproducible() {
        let config = ScenarioConfig::default();
        for seed in 0..20 {
            let s = generate_scenario(&config, seed).unwrap();
            assert_eq!(s.lots.len(), 9);
            assert!(s.drivers.iter().all(|d| d.arrival_time > d.request_time));
            assert_eq!(s, generate_scenario(&config, seed).unwrap());
        }
    }

    #[test]
    fn bad_config() {
        let config = ScenarioConfig { min_lead: 0, ..Default::default() };
        assert!(generate_scenario(&config, 0).is_err());
    }
}
