use crate::algos::MinEnvyParams;
use crate::assign::{scale_cost, AssignError, LotTimeNetwork, OpenDriver};

use super::{Mode, SmartParkError};

/// Cost of leaving a pending driver without a reservation for this step.
pub const UNASSIGNED_COST: f64 = 1.0;

/// One driver of a single step problem: admissible lots with their costs,
/// and the cost of leaving the driver unassigned when that is allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDriver {
    pub arrival: u32,
    pub options: Vec<(usize, f64)>,
    pub unassigned: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSolution {
    pub choice: Vec<Option<usize>>,
    pub scaled_cost: i64,
}

/// Solves one step exactly. `caps[lot][t - 1]` is the number of spaces still
/// free in `lot` at period `t` before any pending driver is placed; a driver
/// placed in a lot occupies it from its arrival period on.
pub fn solve_step(
    n_lots: usize,
    horizon: u32,
    caps: &[Vec<i64>],
    drivers: &[StepDriver],
) -> Result<StepSolution, SmartParkError> {
    let mut open = Vec::with_capacity(drivers.len());
    for d in drivers {
        let mut options = Vec::with_capacity(d.options.len());
        for &(lot, cost) in &d.options {
            if !(cost.is_finite() && cost >= 0.0) || lot >= n_lots {
                return Err(AssignError::BadCost { lot, driver: open.len(), value: cost }.into());
            }
            options.push((lot, scale_cost(cost)));
        }
        if d.arrival == 0 || d.arrival > horizon {
            return Err(SmartParkError::Invalid(format!("arrival {} outside 1..={horizon}", d.arrival)));
        }
        open.push(OpenDriver { end_period: d.arrival, options, unplaced_cost: d.unassigned.map(scale_cost) });
    }
    let network = LotTimeNetwork::build(n_lots, horizon, caps, &open)?;
    let (choice, scaled_cost) = network.solve()?;
    Ok(StepSolution { choice, scaled_cost })
}

/// A driver waiting for a spot at the current step.
#[derive(Debug, Clone, PartialEq)]
pub struct PendingDriver {
    pub driver: usize,
    pub arrival: u32,
    /// Utility of every lot for this driver.
    pub costs: Vec<f64>,
    /// Reservation held from the previous step.
    pub previous: Option<usize>,
}

impl PendingDriver {
    /// Lots no worse than the previous reservation; every lot before the
    /// first reservation.
    pub fn allowed(&self) -> Vec<usize> {
        match self.previous {
            Some(p) => (0..self.costs.len()).filter(|&l| self.costs[l] <= self.costs[p]).collect(),
            None => (0..self.costs.len()).collect(),
        }
    }

    fn cost_of(&self, lot: Option<usize>) -> f64 {
        lot.map_or(UNASSIGNED_COST, |l| self.costs[l])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub choice: Vec<Option<usize>>,
    /// Step objective of `choice`: summed utility plus unassigned penalties in
    /// utility mode, summed deviation from the step mean in fair mode.
    pub objective: f64,
    /// Refinement rounds after the first solve (always 0 in utility mode).
    pub iterations: u32,
}

/// Mean utility over the pending set, unassigned drivers contributing zero.
pub fn step_mean(pending: &[PendingDriver], choice: &[Option<usize>]) -> f64 {
    if pending.is_empty() {
        return 0.0;
    }
    let total = pending.iter().zip(choice).filter_map(|(p, c)| c.map(|l| p.costs[l])).fold(0.0, |a, b| a + b);
    total / pending.len() as f64
}

fn fair_cost(p: &PendingDriver, lot: Option<usize>, target: f64) -> f64 {
    lot.map_or(UNASSIGNED_COST, |l| (p.costs[l] - target).abs())
}

fn fair_drivers(pending: &[PendingDriver], target: f64, frozen: &[Option<usize>]) -> Vec<StepDriver> {
    pending
        .iter()
        .zip(frozen)
        .map(|(p, f)| match f {
            Some(l) => StepDriver { arrival: p.arrival, options: vec![(*l, fair_cost(p, Some(*l), target))], unassigned: None },
            None => StepDriver {
                arrival: p.arrival,
                options: p.allowed().into_iter().map(|l| (l, fair_cost(p, Some(l), target))).collect(),
                unassigned: p.previous.is_none().then_some(UNASSIGNED_COST),
            },
        })
        .collect()
}

/// Assigns the pending drivers of one step.
///
/// `j_bar` is the fair-mode target for the first solve; subsequent rounds
/// retarget to the mean of the latest iterate and freeze drivers whose
/// utility lies within `epsilon` of it, stopping on a change below `delta`
/// or after `maxiter` rounds.
pub fn smartpark_step(
    n_lots: usize,
    horizon: u32,
    caps: &[Vec<i64>],
    pending: &[PendingDriver],
    mode: Mode,
    j_bar: f64,
    params: &MinEnvyParams,
) -> Result<StepOutcome, SmartParkError> {
    params.validate().map_err(|e| SmartParkError::Params(e.to_string()))?;
    if pending.is_empty() {
        return Ok(StepOutcome { choice: Vec::new(), objective: 0.0, iterations: 0 });
    }
    if mode == Mode::Utility {
        let drivers: Vec<StepDriver> = pending
            .iter()
            .map(|p| StepDriver {
                arrival: p.arrival,
                options: p.allowed().into_iter().map(|l| (l, p.costs[l])).collect(),
                unassigned: p.previous.is_none().then_some(UNASSIGNED_COST),
            })
            .collect();
        let sol = solve_step(n_lots, horizon, caps, &drivers)?;
        let objective = pending.iter().zip(&sol.choice).map(|(p, &c)| p.cost_of(c)).fold(0.0, |a, b| a + b);
        return Ok(StepOutcome { choice: sol.choice, objective, iterations: 0 });
    }

    let none = vec![None; pending.len()];
    let mut current = solve_step(n_lots, horizon, caps, &fair_drivers(pending, j_bar, &none))?.choice;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let target = step_mean(pending, &current);
        let (lo, hi) = ((1.0 - params.epsilon) * target, (1.0 + params.epsilon) * target);
        let frozen: Vec<Option<usize>> = pending
            .iter()
            .zip(&current)
            .map(|(p, c)| c.filter(|&l| (lo..=hi).contains(&p.costs[l])))
            .collect();
        let open = frozen.iter().filter(|f| f.is_none()).count() as i64;
        let retained: i64 = pending
            .iter()
            .zip(&current)
            .zip(&frozen)
            .filter(|(_, f)| f.is_none())
            .map(|((p, &c), _)| scale_cost(fair_cost(p, c, target)))
            .sum();
        let sol = solve_step(n_lots, horizon, caps, &fair_drivers(pending, target, &frozen))?;
        if retained - sol.scaled_cost > open {
            current = sol.choice;
        }
        let moved = (step_mean(pending, &current) - target).abs();
        if moved < params.delta || iterations > params.maxiter {
            break;
        }
    }
    let objective = pending.iter().zip(&current).map(|(p, &c)| fair_cost(p, c, j_bar)).fold(0.0, |a, b| a + b);
    Ok(StepOutcome { choice: current, objective, iterations })
}
