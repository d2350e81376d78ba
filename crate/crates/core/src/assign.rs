//! Fixed-cost destination assignment under time-prefix lot capacities.
//!
//! With per-driver costs fixed, the problem "one lot per driver, cumulative
//! arrivals into each lot bounded at every period" is a transportation
//! problem over a chain of lot-time nodes. Each lot contributes a path
//! `(l,1) -> (l,2) -> ... -> (l,T) -> sink` whose arc out of `(l,t)` carries
//! exactly the non-frozen arrivals into `l` up to period `t`, so its capacity
//! is the residual slack of the constraint `x_l(t) <= cap_l`. The constraint
//! matrix is a network matrix and min-cost flow returns an integral optimum.

use serde::Serialize;
use thiserror::Error;

use crate::flow::{min_cost_flow, FlowError, FlowNetwork};
use crate::model::{check_feasible, Assignment, Instance, ModelError};

/// Costs are solved as integers in units of 1e-6 (hours, for walking times).
pub const COST_SCALE: f64 = 1e6;

/// Upper bound on the number of candidate assignments the oracle enumerates.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

pub fn scale_cost(cost: f64) -> i64 {
    (cost * COST_SCALE).round() as i64
}

#[derive(Debug, Error, PartialEq)]
pub enum AssignError {
    #[error("cost matrix is {got_lots}x{got_drivers}, expected {lots}x{drivers}")]
    Shape { lots: usize, drivers: usize, got_lots: usize, got_drivers: usize },
    #[error("cost entry ({lot}, {driver}) = {value} is not finite and nonnegative")]
    BadCost { lot: usize, driver: usize, value: f64 },
    #[error("frozen set covers {got} drivers, instance has {expected}")]
    FrozenLength { expected: usize, got: usize },
    #[error("frozen driver {driver} pinned to unknown lot {lot}")]
    FrozenLot { driver: usize, lot: usize },
    #[error("lot {lot} has negative residual capacity {value} at period {period}")]
    NegativeResidual { lot: usize, period: u32, value: i64 },
    #[error("no feasible completion: {achieved} of {required} drivers placed")]
    Infeasible { required: i64, achieved: i64 },
    #[error("{combinations} candidate assignments exceed the enumeration limit")]
    TooLarge { combinations: f64 },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Per-(lot, driver) objective contribution, stored lot-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n_lots: usize,
    n_drivers: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_fn(
        n_lots: usize,
        n_drivers: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, AssignError> {
        let mut data = Vec::with_capacity(n_lots * n_drivers);
        for lot in 0..n_lots {
            for driver in 0..n_drivers {
                let value = f(lot, driver);
                if !(value.is_finite() && value >= 0.0) {
                    return Err(AssignError::BadCost { lot, driver, value });
                }
                data.push(value);
            }
        }
        Ok(Self { n_lots, n_drivers, data })
    }

    /// Walking time of every (lot, driver) pair.
    pub fn walking_times(instance: &Instance) -> Self {
        Self::from_fn(instance.n_lots(), instance.n_drivers(), |l, r| instance.walk_hours(l, r))
            .expect("walking times are finite and nonnegative")
    }

    pub fn get(&self, lot: usize, driver: usize) -> f64 {
        self.data[lot * self.n_drivers + driver]
    }

    pub fn n_lots(&self) -> usize {
        self.n_lots
    }

    pub fn n_drivers(&self) -> usize {
        self.n_drivers
    }
}

/// Drivers whose lot is held fixed during a solve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrozenSet {
    lots: Vec<Option<usize>>,
}

impl FrozenSet {
    pub fn empty(n_drivers: usize) -> Self {
        Self { lots: vec![None; n_drivers] }
    }

    /// Freezes every driver with `mask[r]` at its lot in `assignment`.
    pub fn from_mask(assignment: &Assignment, mask: &[bool]) -> Self {
        let lots = assignment
            .dest_lot
            .iter()
            .zip(mask)
            .map(|(&l, &m)| m.then_some(l))
            .collect();
        Self { lots }
    }

    pub fn from_lots(lots: Vec<Option<usize>>) -> Self {
        Self { lots }
    }

    pub fn lot(&self, driver: usize) -> Option<usize> {
        self.lots.get(driver).copied().flatten()
    }

    pub fn contains(&self, driver: usize) -> bool {
        self.lot(driver).is_some()
    }

    pub fn len(&self) -> usize {
        self.lots.iter().filter(|l| l.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_drivers(&self) -> usize {
        self.lots.len()
    }

    pub fn mask(&self) -> Vec<bool> {
        self.lots.iter().map(Option::is_some).collect()
    }
}

/// `cap[l][t-1]`: how many non-frozen drivers ending by period `t` may still
/// park in lot `l`. Negative entries mean the frozen drivers alone overfill it.
pub fn residual_capacity(instance: &Instance, frozen: &FrozenSet) -> Vec<Vec<i64>> {
    let horizon = instance.horizon() as usize;
    let departures = instance.departures();
    let mut frozen_arrivals = vec![vec![0i64; horizon]; instance.n_lots()];
    for (r, trip) in instance.trips().iter().enumerate() {
        if let Some(l) = frozen.lot(r) {
            if l < instance.n_lots() {
                frozen_arrivals[l][(trip.end_period - 1) as usize] += 1;
            }
        }
    }
    instance
        .lots()
        .iter()
        .enumerate()
        .map(|(l, lot)| {
            let mut slack = i64::from(lot.capacity) - i64::from(lot.initial_occupancy);
            (0..horizon)
                .map(|t| {
                    slack += departures[l][t] - frozen_arrivals[l][t];
                    slack
                })
                .collect()
        })
        .collect()
}

/// A driver still to be placed: admissible lots with scaled costs, plus an
/// optional cost for leaving the driver unplaced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenDriver {
    pub end_period: u32,
    pub options: Vec<(usize, i64)>,
    pub unplaced_cost: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct LotTimeNetwork {
    pub network: FlowNetwork,
    pub required_flow: i64,
    option_arcs: Vec<Vec<(usize, usize)>>,
}

impl LotTimeNetwork {
    pub const SOURCE: usize = 0;
    pub const SINK: usize = 1;

    /// Builds the network for `drivers` against residual capacities `caps`.
    pub fn build(
        n_lots: usize,
        horizon: u32,
        caps: &[Vec<i64>],
        drivers: &[OpenDriver],
    ) -> Result<Self, AssignError> {
        let horizon_len = horizon as usize;
        for (lot, row) in caps.iter().enumerate() {
            if let Some((t, &value)) = row.iter().enumerate().find(|(_, &v)| v < 0) {
                return Err(AssignError::NegativeResidual { lot, period: t as u32 + 1, value });
            }
        }
        let first_driver = 2;
        let first_slot = first_driver + drivers.len();
        let slot = |lot: usize, period: u32| first_slot + lot * horizon_len + (period as usize - 1);
        let mut network = FlowNetwork::new(first_slot + n_lots * horizon_len, Self::SOURCE, Self::SINK);

        for i in 0..drivers.len() {
            network.add_arc(Self::SOURCE, first_driver + i, 1, 0);
        }
        let mut option_arcs = Vec::with_capacity(drivers.len());
        for (i, d) in drivers.iter().enumerate() {
            let mut arcs = Vec::with_capacity(d.options.len());
            for &(lot, cost) in &d.options {
                arcs.push((network.add_arc(first_driver + i, slot(lot, d.end_period), 1, cost), lot));
            }
            if let Some(cost) = d.unplaced_cost {
                network.add_arc(first_driver + i, Self::SINK, 1, cost);
            }
            option_arcs.push(arcs);
        }
        for (lot, row) in caps.iter().enumerate() {
            for t in 1..=horizon {
                let to = if t == horizon { Self::SINK } else { slot(lot, t + 1) };
                network.add_arc(slot(lot, t), to, row[t as usize - 1], 0);
            }
        }
        Ok(Self { network, required_flow: drivers.len() as i64, option_arcs })
    }

    /// Solves and returns the chosen lot (or `None` if unplaced) per open driver.
    pub fn solve(&self) -> Result<(Vec<Option<usize>>, i64), AssignError> {
        let result = min_cost_flow(&self.network, self.required_flow).map_err(|e| match e {
            FlowError::Infeasible { required, achieved } => AssignError::Infeasible { required, achieved },
            other => AssignError::Flow(other),
        })?;
        let choice = self
            .option_arcs
            .iter()
            .map(|arcs| arcs.iter().find(|(arc, _)| result.arc_flows[*arc] > 0).map(|&(_, lot)| lot))
            .collect();
        Ok((choice, result.total_cost))
    }
}

fn check_inputs(instance: &Instance, costs: &CostMatrix, frozen: &FrozenSet) -> Result<(), AssignError> {
    if costs.n_lots() != instance.n_lots() || costs.n_drivers() != instance.n_drivers() {
        return Err(AssignError::Shape {
            lots: instance.n_lots(),
            drivers: instance.n_drivers(),
            got_lots: costs.n_lots(),
            got_drivers: costs.n_drivers(),
        });
    }
    if frozen.n_drivers() != instance.n_drivers() {
        return Err(AssignError::FrozenLength { expected: instance.n_drivers(), got: frozen.n_drivers() });
    }
    for r in 0..frozen.n_drivers() {
        if let Some(lot) = frozen.lot(r) {
            if lot >= instance.n_lots() {
                return Err(AssignError::FrozenLot { driver: r, lot });
            }
        }
    }
    Ok(())
}

fn open_drivers(instance: &Instance, costs: &CostMatrix, frozen: &FrozenSet) -> (Vec<usize>, Vec<OpenDriver>) {
    let ids: Vec<usize> = (0..instance.n_drivers()).filter(|&r| !frozen.contains(r)).collect();
    let drivers = ids
        .iter()
        .map(|&r| OpenDriver {
            end_period: instance.trips()[r].end_period,
            options: (0..instance.n_lots()).map(|l| (l, scale_cost(costs.get(l, r)))).collect(),
            unplaced_cost: None,
        })
        .collect();
    (ids, drivers)
}

pub fn build_assignment_network(
    instance: &Instance,
    costs: &CostMatrix,
    frozen: &FrozenSet,
) -> Result<LotTimeNetwork, AssignError> {
    check_inputs(instance, costs, frozen)?;
    let caps = residual_capacity(instance, frozen);
    let (_, drivers) = open_drivers(instance, costs, frozen);
    LotTimeNetwork::build(instance.n_lots(), instance.horizon(), &caps, &drivers)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub assignment: Assignment,
    /// Sum of unscaled costs over non-frozen drivers.
    pub cost: f64,
    /// Sum of scaled integer costs over non-frozen drivers.
    pub scaled_cost: i64,
}

fn finish(
    instance: &Instance,
    costs: &CostMatrix,
    frozen: &FrozenSet,
    dest_lot: Vec<usize>,
) -> Result<Solution, AssignError> {
    let open = (0..instance.n_drivers()).filter(|&r| !frozen.contains(r));
    let (cost, scaled_cost) = open.fold((0.0, 0i64), |(c, s), r| {
        let v = costs.get(dest_lot[r], r);
        (c + v, s + scale_cost(v))
    });
    let assignment = Assignment::from_lots(instance, dest_lot)?;
    Ok(Solution { assignment, cost, scaled_cost })
}

/// Minimum-cost placement of the non-frozen drivers by min-cost flow.
pub fn solve_exact(instance: &Instance, costs: &CostMatrix, frozen: &FrozenSet) -> Result<Solution, AssignError> {
    check_inputs(instance, costs, frozen)?;
    let caps = residual_capacity(instance, frozen);
    let (ids, drivers) = open_drivers(instance, costs, frozen);
    let net = LotTimeNetwork::build(instance.n_lots(), instance.horizon(), &caps, &drivers)?;
    let (choice, _) = net.solve()?;
    let mut dest_lot: Vec<usize> = (0..instance.n_drivers()).map(|r| frozen.lot(r).unwrap_or(0)).collect();
    for (&r, lot) in ids.iter().zip(choice) {
        dest_lot[r] = lot.expect("every open driver carries one unit of flow");
    }
    finish(instance, costs, frozen, dest_lot)
}

/// Global optimum by enumerating every lot choice of the non-frozen drivers.
///
/// Ties keep the first candidate in lexicographic order of the open drivers'
/// lot indices.
pub fn brute_force_assign(
    instance: &Instance,
    costs: &CostMatrix,
    frozen: &FrozenSet,
) -> Result<Solution, AssignError> {
    check_inputs(instance, costs, frozen)?;
    let open: Vec<usize> = (0..instance.n_drivers()).filter(|&r| !frozen.contains(r)).collect();
    let n_lots = instance.n_lots();
    let combinations = (n_lots as f64).powi(open.len() as i32);
    if combinations > BRUTE_FORCE_LIMIT as f64 {
        return Err(AssignError::TooLarge { combinations });
    }
    let mut digits = vec![0usize; open.len()];
    let mut dest_lot: Vec<usize> = (0..instance.n_drivers()).map(|r| frozen.lot(r).unwrap_or(0)).collect();
    let mut best: Option<(i64, Vec<usize>)> = None;
    loop {
        for (&r, &l) in open.iter().zip(&digits) {
            dest_lot[r] = l;
        }
        let scaled: i64 = open.iter().map(|&r| scale_cost(costs.get(dest_lot[r], r))).sum();
        if best.as_ref().is_none_or(|(b, _)| scaled < *b) {
            let candidate = Assignment::from_lots(instance, dest_lot.clone())?;
            if check_feasible(instance, &candidate).is_feasible() {
                best = Some((scaled, dest_lot.clone()));
            }
        }
        // odometer, last open driver fastest
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return match best {
                    Some((_, lots)) => finish(instance, costs, frozen, lots),
                    None => Err(AssignError::Infeasible { required: open.len() as i64, achieved: -1 }),
                };
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < n_lots {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Lot, Point, Trip};

    fn lot(id: usize, x: f64, capacity: u32, initial: u32) -> Lot {
        Lot { id, location: Point::new(x, 0.0), capacity, initial_occupancy: initial }
    }

    fn trip(id: usize, origin_x: f64, dest_x: f64, start: u32, end: u32) -> Trip {
        Trip {
            id,
            origin: Point::new(origin_x, 0.0),
            destination: Point::new(dest_x, 0.0),
            start_period: start,
            end_period: end,
        }
    }

    #[test]
    fn residual_without_departures_is_flat() {
        let inst = Instance::new(vec![], vec![lot(0, 0.0, 5, 3)], 4, 3.0).unwrap();
        assert_eq!(residual_capacity(&inst, &FrozenSet::empty(0)), vec![vec![2, 2, 2, 2]]);
    }

    #[test]
    fn residual_grows_with_departures() {
        // the only trip leaves lot 0 in period 2 and ends far away at lot 1
        let lots = vec![lot(0, 0.0, 5, 3), lot(1, 100.0, 5, 0)];
        let inst = Instance::new(vec![trip(0, 0.0, 100.0, 2, 3)], lots, 4, 3.0).unwrap();
        let caps = residual_capacity(&inst, &FrozenSet::empty(1));
        assert_eq!(caps[0], vec![2, 3, 3, 3]);
        assert_eq!(caps[1], vec![5, 5, 5, 5]);
        let frozen = FrozenSet::from_lots(vec![Some(1)]);
        assert_eq!(residual_capacity(&inst, &frozen)[1], vec![5, 5, 4, 4]);
    }

    #[test]
    fn one_driver_one_lot_path() {
        let inst = Instance::new(vec![trip(0, 0.0, 1.0, 1, 1)], vec![lot(0, 0.0, 3, 0)], 1, 2.0).unwrap();
        let costs = CostMatrix::walking_times(&inst);
        let net = build_assignment_network(&inst, &costs, &FrozenSet::empty(1)).unwrap();
        assert_eq!(net.network.node_count, 4);
        let sol = solve_exact(&inst, &costs, &FrozenSet::empty(1)).unwrap();
        assert_eq!(sol.assignment.dest_lot, vec![0]);
        assert_eq!(sol.scaled_cost, scale_cost(0.5));
    }

    #[test]
    fn chain_arc_limits_early_arrivals() {
        // lot 0 (far origin lot for both drivers, capacity full) and lot 1
        // with one free slot at t=1 and a departure freeing another at t=2
        let lots = vec![lot(0, 50.0, 2, 2), lot(1, 0.0, 2, 1)];
        let trips = vec![
            trip(0, 50.0, 0.0, 1, 1),
            trip(1, 0.0, 0.0, 2, 2),
        ];
        let inst = Instance::new(trips, lots, 2, 1.0).unwrap();
        let caps = residual_capacity(&inst, &FrozenSet::empty(2));
        assert_eq!(caps[1], vec![1, 2]);
        let costs = CostMatrix::walking_times(&inst);
        let sol = solve_exact(&inst, &costs, &FrozenSet::empty(2)).unwrap();
        assert_eq!(sol.assignment.dest_lot, vec![1, 1]);
        assert!(check_feasible(&inst, &sol.assignment).is_feasible());
    }

    #[test]
    fn capacity_one_lot_splits_two_drivers() {
        let lots = vec![lot(0, 0.0, 1, 0), lot(1, 1.0, 5, 0), lot(2, 90.0, 5, 0)];
        let trips = vec![trip(0, 90.0, 0.0, 1, 2), trip(1, 90.0, 0.1, 1, 2)];
        let inst = Instance::new(trips, lots, 2, 1.0).unwrap();
        let costs = CostMatrix::walking_times(&inst);
        let frozen = FrozenSet::empty(2);
        let exact = solve_exact(&inst, &costs, &frozen).unwrap();
        let brute = brute_force_assign(&inst, &costs, &frozen).unwrap();
        // {0->0, 1->1} costs 0.9, {0->1, 1->0} costs 1.1
        assert_eq!(exact.assignment.dest_lot, vec![0, 1]);
        assert_eq!(exact.scaled_cost, brute.scaled_cost);
    }

    #[test]
    fn infeasible_toy() {
        // both drivers arrive in period 1 and only depart in period 2
        let inst = Instance::new(
            vec![trip(0, 0.0, 0.0, 2, 1), trip(1, 0.0, 0.0, 2, 1)],
            vec![lot(0, 0.0, 1, 0)],
            2,
            1.0,
        )
        .unwrap();
        let costs = CostMatrix::walking_times(&inst);
        let frozen = FrozenSet::empty(2);
        assert!(matches!(solve_exact(&inst, &costs, &frozen), Err(AssignError::Infeasible { achieved: 1, .. })));
        assert!(matches!(brute_force_assign(&inst, &costs, &frozen), Err(AssignError::Infeasible { .. })));
    }

    #[test]
    fn brute_force_picks_cheaper_lot() {
        let lots = vec![lot(0, 3.0, 1, 0), lot(1, 1.0, 1, 0)];
        let inst = Instance::new(vec![trip(0, 3.0, 0.0, 1, 1)], lots, 1, 1.0).unwrap();
        let costs = CostMatrix::walking_times(&inst);
        let sol = brute_force_assign(&inst, &costs, &FrozenSet::empty(1)).unwrap();
        assert_eq!(sol.assignment.dest_lot, vec![1]);
    }

    #[test]
    fn brute_force_guard() {
        let lots: Vec<Lot> = (0..10).map(|i| lot(i, i as f64, 30, 0)).collect();
        let trips: Vec<Trip> = (0..7).map(|i| trip(i, 0.0, 0.0, 1, 1)).collect();
        let inst = Instance::new(trips, lots, 1, 1.0).unwrap();
        let costs = CostMatrix::walking_times(&inst);
        assert!(matches!(
            brute_force_assign(&inst, &costs, &FrozenSet::empty(7)),
            Err(AssignError::TooLarge { .. })
        ));
    }

    #[test]
    fn frozen_overfill_is_reported() {
        let inst = Instance::new(
            vec![trip(0, 9.0, 0.0, 1, 1), trip(1, 9.0, 0.0, 1, 1)],
            vec![lot(0, 0.0, 1, 0), lot(1, 9.0, 4, 0)],
            1,
            1.0,
        )
        .unwrap();
        let costs = CostMatrix::walking_times(&inst);
        let frozen = FrozenSet::from_lots(vec![Some(0), None]);
        let ok = solve_exact(&inst, &costs, &frozen).unwrap();
        assert_eq!(ok.assignment.dest_lot, vec![0, 1]);
        // freezing both into the one-slot lot leaves -1 residual
        let bad = FrozenSet::from_lots(vec![Some(0), Some(0)]);
        assert_eq!(
            solve_exact(&inst, &costs, &bad),
            Err(AssignError::NegativeResidual { lot: 0, period: 1, value: -1 })
        );
    }

    #[test]
    fn cost_matrix_rejects_bad_entries() {
        assert!(CostMatrix::from_fn(1, 1, |_, _| -1.0).is_err());
        assert!(CostMatrix::from_fn(1, 1, |_, _| f64::NAN).is_err());
    }
}
