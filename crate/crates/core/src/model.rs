//! Instances, assignments, lot occupancy and the feasibility check.
//!
//! Periods are 1-based (`1..=horizon`). Occupancy matrices are stored per lot
//! with index `t - 1` holding the value at the end of period `t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fairness;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("instance has no parking lots")]
    NoLots,
    #[error("trip {index} carries id {id}; ids must equal their position")]
    TripId { index: usize, id: usize },
    #[error("lot {index} carries id {id}; ids must equal their position")]
    LotId { index: usize, id: usize },
    #[error("trip {trip}: period {period} outside 1..={horizon}")]
    PeriodOutOfRange { trip: usize, period: u32, horizon: u32 },
    #[error("trip {trip} has non-finite coordinates")]
    NonFinite { trip: usize },
    #[error("lot {lot}: initial occupancy {initial} exceeds capacity {capacity}")]
    OverfullLot { lot: usize, initial: u32, capacity: u32 },
    #[error("walking speed must be positive and finite (got {0})")]
    WalkingSpeed(f64),
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("origin_lot has {got} entries for {expected} trips")]
    OriginLotLength { expected: usize, got: usize },
    #[error("origin_lot[{trip}] = {got}, but the nearest lot is {expected}")]
    OriginLotMismatch { trip: usize, expected: usize, got: usize },
    #[error("assignment has {got} entries for {expected} drivers")]
    AssignmentLength { expected: usize, got: usize },
    #[error("driver {driver} assigned to unknown lot {lot}")]
    UnknownLot { driver: usize, lot: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn l1(&self, other: &Point) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trip {
    pub id: usize,
    pub origin: Point,
    pub destination: Point,
    pub start_period: u32,
    pub end_period: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lot {
    pub id: usize,
    pub location: Point,
    pub capacity: u32,
    pub initial_occupancy: u32,
}

/// Index of the lot nearest (L1) to `point`; ties go to the lowest index.
pub fn nearest_lot(point: &Point, lots: &[Lot]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, lot) in lots.iter().enumerate() {
        let d = point.l1(&lot.location);
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((idx, d)),
        }
    }
    best.map(|(idx, _)| idx)
}

/// Pickup lot of every driver: the lot nearest to the trip origin.
pub fn compute_origin_lots(trips: &[Trip], lots: &[Lot]) -> Result<Vec<usize>, ModelError> {
    if lots.is_empty() {
        return Err(ModelError::NoLots);
    }
    Ok(trips
        .iter()
        .map(|t| nearest_lot(&t.origin, lots).expect("lots nonempty"))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct Instance {
    trips: Vec<Trip>,
    lots: Vec<Lot>,
    horizon: u32,
    walking_speed: f64,
    origin_lot: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceDoc {
    trips: Vec<Trip>,
    lots: Vec<Lot>,
    horizon: u32,
    walking_speed: f64,
    origin_lot: Vec<usize>,
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = ModelError;

    fn try_from(doc: InstanceDoc) -> Result<Self, Self::Error> {
        let inst = Instance::new(doc.trips, doc.lots, doc.horizon, doc.walking_speed)?;
        if doc.origin_lot.len() != inst.origin_lot.len() {
            return Err(ModelError::OriginLotLength {
                expected: inst.origin_lot.len(),
                got: doc.origin_lot.len(),
            });
        }
        for (trip, (&got, &expected)) in doc.origin_lot.iter().zip(&inst.origin_lot).enumerate() {
            if got != expected {
                return Err(ModelError::OriginLotMismatch { trip, expected, got });
            }
        }
        Ok(inst)
    }
}

impl From<Instance> for InstanceDoc {
    fn from(inst: Instance) -> Self {
        InstanceDoc {
            trips: inst.trips,
            lots: inst.lots,
            horizon: inst.horizon,
            walking_speed: inst.walking_speed,
            origin_lot: inst.origin_lot,
        }
    }
}

impl Instance {
    /// Validates the inputs and derives the pickup lot of every trip.
    pub fn new(
        trips: Vec<Trip>,
        lots: Vec<Lot>,
        horizon: u32,
        walking_speed: f64,
    ) -> Result<Self, ModelError> {
        if lots.is_empty() {
            return Err(ModelError::NoLots);
        }
        if horizon == 0 {
            return Err(ModelError::EmptyHorizon);
        }
        if !(walking_speed.is_finite() && walking_speed > 0.0) {
            return Err(ModelError::WalkingSpeed(walking_speed));
        }
        for (index, lot) in lots.iter().enumerate() {
            if lot.id != index {
                return Err(ModelError::LotId { index, id: lot.id });
            }
            if lot.initial_occupancy > lot.capacity {
                return Err(ModelError::OverfullLot {
                    lot: index,
                    initial: lot.initial_occupancy,
                    capacity: lot.capacity,
                });
            }
        }
        for (index, trip) in trips.iter().enumerate() {
            if trip.id != index {
                return Err(ModelError::TripId { index, id: trip.id });
            }
            if !trip.origin.is_finite() || !trip.destination.is_finite() {
                return Err(ModelError::NonFinite { trip: index });
            }
            for period in [trip.start_period, trip.end_period] {
                if period == 0 || period > horizon {
                    return Err(ModelError::PeriodOutOfRange { trip: index, period, horizon });
                }
            }
        }
        let origin_lot = compute_origin_lots(&trips, &lots)?;
        Ok(Self { trips, lots, horizon, walking_speed, origin_lot })
    }

    pub fn trips(&self) -> &[Trip] {
        &self.trips
    }

    pub fn lots(&self) -> &[Lot] {
        &self.lots
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn walking_speed(&self) -> f64 {
        self.walking_speed
    }

    pub fn origin_lot(&self) -> &[usize] {
        &self.origin_lot
    }

    pub fn n_drivers(&self) -> usize {
        self.trips.len()
    }

    pub fn n_lots(&self) -> usize {
        self.lots.len()
    }

    /// Walking time (hours) of `driver` if parked at `lot`.
    pub fn walk_hours(&self, lot: usize, driver: usize) -> f64 {
        fairness::walking_time(
            &self.trips[driver].destination,
            &self.lots[lot].location,
            self.walking_speed,
        )
        .expect("walking speed validated at construction")
    }

    /// Departures `Z[lot][t-1]`: trips starting in period `t` from their pickup lot.
    pub fn departures(&self) -> Vec<Vec<i64>> {
        let mut z = vec![vec![0i64; self.horizon as usize]; self.lots.len()];
        for (trip, &lot) in self.trips.iter().zip(&self.origin_lot) {
            z[lot][(trip.start_period - 1) as usize] += 1;
        }
        z
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One destination lot per driver, with the walking times it induces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub dest_lot: Vec<usize>,
    pub beta: Vec<f64>,
}

impl Assignment {
    pub fn from_lots(instance: &Instance, dest_lot: Vec<usize>) -> Result<Self, ModelError> {
        if dest_lot.len() != instance.n_drivers() {
            return Err(ModelError::AssignmentLength {
                expected: instance.n_drivers(),
                got: dest_lot.len(),
            });
        }
        let mut beta = Vec::with_capacity(dest_lot.len());
        for (driver, &lot) in dest_lot.iter().enumerate() {
            if lot >= instance.n_lots() {
                return Err(ModelError::UnknownLot { driver, lot });
            }
            beta.push(instance.walk_hours(lot, driver));
        }
        Ok(Self { dest_lot, beta })
    }

    pub fn n_drivers(&self) -> usize {
        self.dest_lot.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyLedger {
    pub arrivals: Vec<Vec<i64>>,
    pub departures: Vec<Vec<i64>>,
    pub occupancy: Vec<Vec<i64>>,
}

impl OccupancyLedger {
    pub fn total_arrivals(&self) -> i64 {
        self.arrivals.iter().flatten().sum()
    }

    pub fn total_departures(&self) -> i64 {
        self.departures.iter().flatten().sum()
    }
}

/// Arrivals, departures and the occupancy recurrence for an assignment.
///
/// Drivers whose lot index is out of range are skipped; `check_feasible`
/// reports them.
pub fn build_ledger(instance: &Instance, assignment: &Assignment) -> OccupancyLedger {
    let n_lots = instance.n_lots();
    let horizon = instance.horizon() as usize;
    let mut arrivals = vec![vec![0i64; horizon]; n_lots];
    for (trip, &lot) in instance.trips().iter().zip(&assignment.dest_lot) {
        if lot < n_lots {
            arrivals[lot][(trip.end_period - 1) as usize] += 1;
        }
    }
    let departures = instance.departures();
    let mut occupancy = vec![vec![0i64; horizon]; n_lots];
    for (l, lot) in instance.lots().iter().enumerate() {
        let mut x = i64::from(lot.initial_occupancy);
        for t in 0..horizon {
            x += arrivals[l][t] - departures[l][t];
            occupancy[l][t] = x;
        }
    }
    OccupancyLedger { arrivals, departures, occupancy }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CapacityViolation {
    pub lot: usize,
    pub period: u32,
    pub occupancy: i64,
    pub capacity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NegativeOccupancy {
    pub lot: usize,
    pub period: u32,
    pub occupancy: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AssignmentDefect {
    Length { expected: usize, got: usize },
    UnknownLot { driver: usize, lot: usize },
}

/// Outcome of the feasibility check. Negative occupancy is only a warning:
/// departures are not tied to earlier arrivals, so the recurrence may dip
/// below zero without violating any constraint.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Feasibility {
    pub violations: Vec<CapacityViolation>,
    pub defects: Vec<AssignmentDefect>,
    pub warnings: Vec<NegativeOccupancy>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty() && self.defects.is_empty()
    }
}

pub fn check_feasible(instance: &Instance, assignment: &Assignment) -> Feasibility {
    let mut verdict = Feasibility::default();
    if assignment.dest_lot.len() != instance.n_drivers() {
        verdict.defects.push(AssignmentDefect::Length {
            expected: instance.n_drivers(),
            got: assignment.dest_lot.len(),
        });
    }
    for (driver, &lot) in assignment.dest_lot.iter().enumerate() {
        if lot >= instance.n_lots() {
            verdict.defects.push(AssignmentDefect::UnknownLot { driver, lot });
        }
    }
    let ledger = build_ledger(instance, assignment);
    for (l, lot) in instance.lots().iter().enumerate() {
        for (t, &x) in ledger.occupancy[l].iter().enumerate() {
            let period = t as u32 + 1;
            if x > i64::from(lot.capacity) {
                verdict.violations.push(CapacityViolation {
                    lot: l,
                    period,
                    occupancy: x,
                    capacity: lot.capacity,
                });
            }
            if x < 0 {
                verdict.warnings.push(NegativeOccupancy { lot: l, period, occupancy: x });
            }
        }
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lot(id: usize, x: f64, y: f64, capacity: u32, initial: u32) -> Lot {
        Lot { id, location: Point::new(x, y), capacity, initial_occupancy: initial }
    }

    fn trip(id: usize, origin: Point, destination: Point, start: u32, end: u32) -> Trip {
        Trip { id, origin, destination, start_period: start, end_period: end }
    }

    #[test]
    fn origin_lot_unique_nearest() {
        let lots = vec![lot(0, 1.0, 0.0, 1, 0), lot(1, 5.0, 5.0, 1, 0)];
        let trips = vec![trip(0, Point::new(0.0, 0.0), Point::default(), 1, 1)];
        assert_eq!(compute_origin_lots(&trips, &lots).unwrap(), vec![0]);
    }

    #[test]
    fn origin_lot_tie_goes_to_lowest_index() {
        let lots = vec![lot(0, 1.0, 0.0, 1, 0), lot(1, 0.0, 1.0, 1, 0)];
        let trips = vec![trip(0, Point::new(0.0, 0.0), Point::default(), 1, 1)];
        assert_eq!(compute_origin_lots(&trips, &lots).unwrap(), vec![0]);
    }

    #[test]
    fn origin_lots_need_lots() {
        assert_eq!(compute_origin_lots(&[], &[]), Err(ModelError::NoLots));
    }

    #[test]
    fn single_driver_ledger() {
        // driver leaves lot 0 in period 1 and parks in lot 1 in period 3
        let lots = vec![lot(0, 0.0, 0.0, 1, 1), lot(1, 10.0, 0.0, 1, 0)];
        let trips = vec![trip(0, Point::new(0.0, 0.0), Point::new(10.0, 0.0), 1, 3)];
        let inst = Instance::new(trips, lots, 5, 3.0).unwrap();
        let a = Assignment::from_lots(&inst, vec![1]).unwrap();
        let ledger = build_ledger(&inst, &a);
        assert_eq!(ledger.occupancy[0], vec![0, 0, 0, 0, 0]);
        assert_eq!(ledger.occupancy[1], vec![0, 0, 1, 1, 1]);
        assert!(check_feasible(&inst, &a).is_feasible());
    }

    #[test]
    fn empty_trip_set_keeps_initial_occupancy() {
        let lots = vec![lot(0, 0.0, 0.0, 4, 2), lot(1, 1.0, 0.0, 3, 3)];
        let inst = Instance::new(vec![], lots, 4, 3.0).unwrap();
        let a = Assignment::from_lots(&inst, vec![]).unwrap();
        let ledger = build_ledger(&inst, &a);
        assert_eq!(ledger.occupancy, vec![vec![2; 4], vec![3; 4]]);
        assert!(check_feasible(&inst, &a).is_feasible());
    }

    #[test]
    fn two_arrivals_into_one_slot_is_infeasible() {
        // lot 1 has one slot; both drivers pick up from lot 0 (far away)
        let lots = vec![lot(0, 100.0, 0.0, 5, 2), lot(1, 0.0, 0.0, 1, 0)];
        let o = Point::new(100.0, 0.0);
        let trips = vec![
            trip(0, o, Point::new(0.0, 0.0), 1, 2),
            trip(1, o, Point::new(0.0, 0.0), 1, 2),
        ];
        let inst = Instance::new(trips, lots, 3, 3.0).unwrap();
        let a = Assignment::from_lots(&inst, vec![1, 1]).unwrap();
        let verdict = check_feasible(&inst, &a);
        assert!(!verdict.is_feasible());
        assert_eq!(verdict.violations[0].lot, 1);
        assert_eq!(verdict.violations[0].period, 2);
        assert_eq!(verdict.violations[0].occupancy, 2);
    }

    #[test]
    fn negative_occupancy_is_a_warning() {
        let lots = vec![lot(0, 0.0, 0.0, 2, 0), lot(1, 5.0, 0.0, 2, 0)];
        let trips = vec![trip(0, Point::new(0.0, 0.0), Point::new(5.0, 0.0), 1, 2)];
        let inst = Instance::new(trips, lots, 2, 3.0).unwrap();
        let a = Assignment::from_lots(&inst, vec![1]).unwrap();
        let verdict = check_feasible(&inst, &a);
        assert!(verdict.is_feasible());
        assert_eq!(
            verdict.warnings,
            vec![
                NegativeOccupancy { lot: 0, period: 1, occupancy: -1 },
                NegativeOccupancy { lot: 0, period: 2, occupancy: -1 }
            ]
        );
    }

    #[test]
    fn malformed_assignment_reports_defects() {
        let lots = vec![lot(0, 0.0, 0.0, 2, 0)];
        let trips = vec![trip(0, Point::default(), Point::default(), 1, 1)];
        let inst = Instance::new(trips, lots, 1, 3.0).unwrap();
        let bad = Assignment { dest_lot: vec![3, 0], beta: vec![0.0, 0.0] };
        let verdict = check_feasible(&inst, &bad);
        assert!(!verdict.is_feasible());
        assert_eq!(verdict.defects.len(), 2);
    }

    #[test]
    fn instance_validation() {
        let lots = vec![lot(0, 0.0, 0.0, 1, 2)];
        assert!(matches!(
            Instance::new(vec![], lots, 3, 3.0),
            Err(ModelError::OverfullLot { .. })
        ));
        let lots = vec![lot(0, 0.0, 0.0, 1, 0)];
        let trips = vec![trip(0, Point::default(), Point::default(), 1, 4)];
        assert!(matches!(
            Instance::new(trips, lots.clone(), 3, 3.0),
            Err(ModelError::PeriodOutOfRange { period: 4, .. })
        ));
        assert!(matches!(Instance::new(vec![], lots, 3, 0.0), Err(ModelError::WalkingSpeed(_))));
    }

    #[test]
    fn json_rejects_wrong_origin_lot() {
        let lots = vec![lot(0, 0.0, 0.0, 1, 0), lot(1, 9.0, 0.0, 1, 0)];
        let trips = vec![trip(0, Point::new(8.0, 0.0), Point::default(), 1, 1)];
        let inst = Instance::new(trips, lots, 2, 3.0).unwrap();
        let text = inst.to_json().replace("\"origin_lot\": [\n    1\n  ]", "\"origin_lot\": [\n    0\n  ]");
        assert!(text.contains("\"origin_lot\": [\n    0"));
        assert!(Instance::from_json(&text).is_err());
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }
}
