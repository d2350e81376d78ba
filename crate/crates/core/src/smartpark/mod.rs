//! Dynamic parking allocation: drivers request a spot ahead of arrival and
//! are (re)assigned at every time step until they arrive.
//!
//! The utility mode minimizes the summed driver utility each step; the fair
//! mode minimizes deviation from the running mean utility and refines the
//! step solution with the band-freezing loop used by [`crate::algos::min_envy`].

mod generator;
mod sim;
mod step;

pub use generator::{generate_scenario, ScenarioConfig};
pub use sim::{
    check_cost_improvement, check_reservations, simulate, CostIncrease, Outcome, ReservationOverflow, SimMetrics,
    StepRecord,
};
pub use step::{smartpark_step, solve_step, PendingDriver, StepDriver, StepOutcome, StepSolution, UNASSIGNED_COST};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assign::AssignError;
use crate::fairness::MetricError;
use crate::model::Point;

#[derive(Debug, Error)]
pub enum SmartParkError {
    #[error("driver {driver}: arrival {arrival} before request {request}")]
    ArrivalBeforeRequest { driver: usize, request: u32, arrival: u32 },
    #[error("drivers must be ordered by request time (driver {0} is out of order)")]
    Unordered(usize),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("driver {driver}: {what} must be positive")]
    ZeroDenominator { driver: usize, what: &'static str },
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Utility,
    Fair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParkLot {
    pub id: usize,
    pub location: Point,
    pub capacity: u32,
    pub initial_occupancy: u32,
    /// Pre-parked vehicles leaving in each period, indexed by period - 1.
    pub departures: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverRequest {
    pub id: usize,
    pub request_time: u32,
    pub arrival_time: u32,
    pub destination: Point,
    pub lambda: f64,
    /// Price of each lot for this driver, indexed by lot.
    pub monetary_cost: Vec<f64>,
    pub max_money: f64,
    pub max_distance: f64,
}

/// A dynamic scenario: lots with a departure schedule and a request stream
/// ordered by request time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub horizon: u32,
    pub walking_speed: f64,
    pub lots: Vec<ParkLot>,
    pub drivers: Vec<DriverRequest>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SmartParkError> {
        let invalid = |m: String| Err(SmartParkError::Invalid(m));
        if self.horizon == 0 {
            return invalid("horizon must be at least 1".into());
        }
        if !(self.walking_speed.is_finite() && self.walking_speed > 0.0) {
            return invalid(format!("walking speed {} must be positive", self.walking_speed));
        }
        if self.lots.is_empty() {
            return invalid("at least one lot is required".into());
        }
        for (i, lot) in self.lots.iter().enumerate() {
            if lot.id != i {
                return invalid(format!("lot at position {i} has id {}", lot.id));
            }
            if !lot.location.is_finite() {
                return invalid(format!("lot {i} has a non-finite location"));
            }
            if lot.initial_occupancy > lot.capacity {
                return invalid(format!("lot {i} starts above capacity"));
            }
            if lot.departures.len() != self.horizon as usize {
                return invalid(format!("lot {i} needs {} departure entries", self.horizon));
            }
            if lot.departures.iter().map(|&d| u64::from(d)).sum::<u64>() > u64::from(lot.initial_occupancy) {
                return invalid(format!("lot {i} releases more vehicles than it starts with"));
            }
        }
        let mut last_request = 0;
        for (i, d) in self.drivers.iter().enumerate() {
            if d.id != i {
                return invalid(format!("driver at position {i} has id {}", d.id));
            }
            if d.arrival_time < d.request_time {
                return Err(SmartParkError::ArrivalBeforeRequest {
                    driver: i,
                    request: d.request_time,
                    arrival: d.arrival_time,
                });
            }
            if d.request_time < last_request {
                return Err(SmartParkError::Unordered(i));
            }
            last_request = d.request_time;
            if d.request_time == 0 || d.arrival_time > self.horizon {
                return invalid(format!("driver {i} times must lie in 1..={}", self.horizon));
            }
            if !(0.0..=1.0).contains(&d.lambda) {
                return invalid(format!("driver {i} weight {} outside [0, 1]", d.lambda));
            }
            if !(d.max_money.is_finite() && d.max_money > 0.0) {
                return Err(SmartParkError::ZeroDenominator { driver: i, what: "max_money" });
            }
            if !(d.max_distance.is_finite() && d.max_distance > 0.0) {
                return Err(SmartParkError::ZeroDenominator { driver: i, what: "max_distance" });
            }
            if d.monetary_cost.len() != self.lots.len() || d.monetary_cost.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                return invalid(format!("driver {i} needs one finite nonnegative price per lot"));
            }
            if !d.destination.is_finite() {
                return invalid(format!("driver {i} has a non-finite destination"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Per-driver utility inputs laid out lot-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilitySpec {
    pub lambda: Vec<f64>,
    pub monetary_cost: Vec<Vec<f64>>,
    pub max_money: Vec<f64>,
    pub distance: Vec<Vec<f64>>,
    pub max_distance: Vec<f64>,
}

impl UtilitySpec {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let lots = &scenario.lots;
        let drivers = &scenario.drivers;
        Self {
            lambda: drivers.iter().map(|d| d.lambda).collect(),
            monetary_cost: (0..lots.len()).map(|l| drivers.iter().map(|d| d.monetary_cost[l]).collect()).collect(),
            max_money: drivers.iter().map(|d| d.max_money).collect(),
            distance: lots.iter().map(|lot| drivers.iter().map(|d| d.destination.l1(&lot.location)).collect()).collect(),
            max_distance: drivers.iter().map(|d| d.max_distance).collect(),
        }
    }

    pub fn n_lots(&self) -> usize {
        self.distance.len()
    }

    pub fn n_drivers(&self) -> usize {
        self.lambda.len()
    }
}

/// `λ·M/M_r + (1−λ)·D/D_r` for one driver and lot.
pub fn utility(spec: &UtilitySpec, driver: usize, lot: usize) -> Result<f64, SmartParkError> {
    utility_value(
        spec.lambda[driver],
        spec.monetary_cost[lot][driver],
        spec.max_money[driver],
        spec.distance[lot][driver],
        spec.max_distance[driver],
    )
    .map_err(|what| SmartParkError::ZeroDenominator { driver, what })
}

fn utility_value(lambda: f64, money: f64, max_money: f64, distance: f64, max_distance: f64) -> Result<f64, &'static str> {
    if max_money.is_nan() || max_money <= 0.0 {
        return Err("max_money");
    }
    if max_distance.is_nan() || max_distance <= 0.0 {
        return Err("max_distance");
    }
    Ok(lambda * money / max_money + (1.0 - lambda) * distance / max_distance)
}
