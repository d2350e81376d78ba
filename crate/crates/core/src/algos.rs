//! Iterative envy minimization and the two reference methods.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assign::{scale_cost, solve_exact, AssignError, CostMatrix, FrozenSet};
use crate::fairness::{self, to_minutes, MetricError};
use crate::model::{check_feasible, nearest_lot, Assignment, Instance, Lot, ModelError};

#[derive(Debug, Error, PartialEq)]
pub enum AlgoError {
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no lot has a free spot for driver {driver} in period {period}")]
    NoSpace { driver: usize, period: u32 },
    #[error("invalid parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initializer {
    #[default]
    MinSum,
    NoScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinEnvyParams {
    pub epsilon: f64,
    /// Convergence tolerance on the mean walking time, hours.
    pub delta: f64,
    pub maxiter: u32,
    pub init: Initializer,
}

impl Default for MinEnvyParams {
    fn default() -> Self {
        Self { epsilon: 0.1, delta: 1e-4, maxiter: 20, init: Initializer::MinSum }
    }
}

impl MinEnvyParams {
    pub fn validate(&self) -> Result<(), AlgoError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(AlgoError::Params(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(AlgoError::Params(format!("delta must be positive, got {}", self.delta)));
        }
        if self.maxiter == 0 {
            return Err(AlgoError::Params("maxiter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MinEnvy,
    MinSum,
    NoScheme,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::MinEnvy, Method::MinSum, Method::NoScheme];

    pub fn name(self) -> &'static str {
        match self {
            Method::MinEnvy => "min-envy",
            Method::MinSum => "min-sum",
            Method::NoScheme => "no-scheme",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: u32,
    /// Mean walking time, hours.
    pub mean_walk: f64,
    /// Mean envy, hours.
    pub mean_envy: f64,
    pub frozen: usize,
    /// Objective of the solved subproblem, hours (zero for the initial state).
    pub subproblem_cost: f64,
    pub subproblem_scaled: i64,
    /// Scaled objective of keeping the previous lots of the open drivers.
    pub retained_scaled: i64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub initializer: Initializer,
    pub initial: IterationRecord,
    pub iterations: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn records(&self) -> impl Iterator<Item = &IterationRecord> {
        std::iter::once(&self.initial).chain(&self.iterations)
    }

    pub fn final_record(&self) -> &IterationRecord {
        self.iterations.last().unwrap_or(&self.initial)
    }

    /// CSV with one row per state, minutes throughout.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,H_minutes,F_minutes,S_size,subproblem_cost\n");
        for r in self.records() {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.iter,
                to_minutes(r.mean_walk),
                to_minutes(r.mean_envy),
                r.frozen,
                to_minutes(r.subproblem_cost)
            )
            .expect("writing to a String");
        }
        out
    }
}

/// Minimizes total walking time subject to lot capacities.
pub fn min_sum(instance: &Instance) -> Result<Assignment, AlgoError> {
    let costs = CostMatrix::walking_times(instance);
    let sol = solve_exact(instance, &costs, &FrozenSet::empty(instance.n_drivers()))?;
    Ok(sol.assignment)
}

/// Greedy simulation: period by period, each arriving driver (ascending id)
/// takes the nearest lot with a free spot. Departures of a period are applied
/// before its arrivals.
pub fn no_scheme(instance: &Instance) -> Result<Assignment, AlgoError> {
    let horizon = instance.horizon() as usize;
    let departures = instance.departures();
    let mut occupied: Vec<i64> = instance.lots().iter().map(|l| i64::from(l.initial_occupancy)).collect();
    let mut by_period: Vec<Vec<usize>> = vec![Vec::new(); horizon];
    for (r, trip) in instance.trips().iter().enumerate() {
        by_period[(trip.end_period - 1) as usize].push(r);
    }
    let mut dest_lot = vec![0usize; instance.n_drivers()];
    for (t, arriving) in by_period.iter().enumerate() {
        for (l, occ) in occupied.iter_mut().enumerate() {
            *occ -= departures[l][t];
        }
        for &r in arriving {
            let open: Vec<Lot> = instance
                .lots()
                .iter()
                .zip(&occupied)
                .filter(|(lot, &occ)| occ < i64::from(lot.capacity))
                .map(|(lot, _)| lot.clone())
                .collect();
            let pick = nearest_lot(&instance.trips()[r].destination, &open)
                .map(|k| open[k].id)
                .ok_or(AlgoError::NoSpace { driver: r, period: t as u32 + 1 })?;
            occupied[pick] += 1;
            dest_lot[r] = pick;
        }
    }
    Ok(Assignment::from_lots(instance, dest_lot)?)
}

fn record(
    instance: &Instance,
    iter: u32,
    assignment: &Assignment,
    frozen: usize,
    subproblem: (f64, i64, i64),
) -> Result<IterationRecord, AlgoError> {
    Ok(IterationRecord {
        iter,
        mean_walk: fairness::mean_walk(&assignment.beta)?,
        mean_envy: fairness::mean_envy(&assignment.beta)?,
        frozen,
        subproblem_cost: subproblem.0,
        subproblem_scaled: subproblem.1,
        retained_scaled: subproblem.2,
        feasible: check_feasible(instance, assignment).is_feasible(),
    })
}

/// Iterative envy minimization.
///
/// Starting from a feasible assignment, each round freezes the drivers whose
/// walking time is within `epsilon` (relative) of the current mean, re-places
/// the others to minimize their absolute deviation from that mean, and stops
/// once the mean moves by less than `delta` or after `maxiter + 1` rounds.
pub fn min_envy(instance: &Instance, params: &MinEnvyParams) -> Result<(Assignment, IterationTrace), AlgoError> {
    params.validate()?;
    let mut current = match params.init {
        Initializer::MinSum => min_sum(instance)?,
        Initializer::NoScheme => no_scheme(instance)?,
    };
    if instance.n_drivers() == 0 {
        let empty = IterationRecord {
            iter: 0,
            mean_walk: 0.0,
            mean_envy: 0.0,
            frozen: 0,
            subproblem_cost: 0.0,
            subproblem_scaled: 0,
            retained_scaled: 0,
            feasible: true,
        };
        return Ok((current, IterationTrace { initializer: params.init, initial: empty, iterations: vec![] }));
    }
    let walk = CostMatrix::walking_times(instance);
    let initial = record(instance, 0, &current, 0, (0.0, 0, 0))?;
    let mut trace = IterationTrace { initializer: params.init, initial, iterations: Vec::new() };

    let mut i = 1u32;
    loop {
        let target = fairness::mean_walk(&current.beta)?;
        let band = fairness::select_band(&current.beta, params.epsilon)?;
        let frozen = FrozenSet::from_mask(&current, &band);
        let costs = CostMatrix::from_fn(instance.n_lots(), instance.n_drivers(), |l, r| {
            (walk.get(l, r) - target).abs()
        })?;
        let retained: i64 = (0..instance.n_drivers())
            .filter(|&r| !band[r])
            .map(|r| scale_cost(costs.get(current.dest_lot[r], r)))
            .sum();
        let sol = solve_exact(instance, &costs, &frozen)?;
        // Each scaled cost is rounded by at most half a unit, so a gain no larger
        // than the number of open drivers cannot be told apart from a tie.
        let open = (instance.n_drivers() - frozen.len()) as i64;
        let next = if retained - sol.scaled_cost <= open { current.clone() } else { sol.assignment };
        let rec = record(instance, i, &next, frozen.len(), (sol.cost, sol.scaled_cost, retained))?;
        let moved = (rec.mean_walk - target).abs();
        trace.iterations.push(rec);
        current = next;
        if moved < params.delta || i > params.maxiter {
            break;
        }
        i += 1;
    }
    Ok((current, trace))
}

/// Runs `method` and returns its assignment, with the trace for min-envy.
pub fn run_method(
    instance: &Instance,
    method: Method,
    params: &MinEnvyParams,
) -> Result<(Assignment, Option<IterationTrace>), AlgoError> {
    match method {
        Method::MinEnvy => min_envy(instance, params).map(|(a, t)| (a, Some(t))),
        Method::MinSum => min_sum(instance).map(|a| (a, None)),
        Method::NoScheme => no_scheme(instance).map(|a| (a, None)),
    }
}
