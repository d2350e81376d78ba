use serde::Serialize;

use crate::algos::MinEnvyParams;
use crate::fairness::{jains_index, mean_envy, mean_walk, Jains};

use super::step::{smartpark_step, step_mean, PendingDriver, UNASSIGNED_COST};
use super::{utility, Mode, Scenario, SmartParkError, UtilitySpec};

/// Reservations held by the pending drivers after one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: u32,
    /// `(driver, lot, utility)`; the utility is the unassigned penalty when
    /// `lot` is `None`.
    pub reservations: Vec<(usize, Option<usize>, f64)>,
    pub j_bar: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetrics {
    pub n_drivers: usize,
    pub assigned: usize,
    pub unassigned: usize,
    /// Mean envy of the final utilities, unassigned drivers counted at the
    /// penalty value.
    pub mean_envy: f64,
    pub mean_utility: f64,
    pub jains: f64,
    pub jains_degenerate: bool,
    /// Walking-time metrics over assigned drivers only, hours.
    pub walk_mean_envy: Option<f64>,
    pub walk_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub mode: Mode,
    pub final_lot: Vec<Option<usize>>,
    pub utility: Vec<f64>,
    pub walk_hours: Vec<Option<f64>>,
    pub history: Vec<StepRecord>,
    /// `None` for a scenario without drivers.
    pub metrics: Option<SimMetrics>,
}

impl Outcome {
    pub fn unassigned(&self) -> Vec<usize> {
        (0..self.final_lot.len()).filter(|&r| self.final_lot[r].is_none()).collect()
    }
}

fn cumulative(values: impl Iterator<Item = i64>) -> Vec<i64> {
    values
        .scan(0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Occupancy of every lot over the horizon from pre-parked vehicles and the
/// drivers in `placed` (driver, lot).
fn occupancy(scenario: &Scenario, placed: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<i64>> {
    let h = scenario.horizon as usize;
    let mut arrivals = vec![vec![0i64; h]; scenario.lots.len()];
    for (r, l) in placed {
        arrivals[l][scenario.drivers[r].arrival_time as usize - 1] += 1;
    }
    scenario
        .lots
        .iter()
        .zip(arrivals)
        .map(|(lot, arr)| {
            let dep = cumulative(lot.departures.iter().map(|&d| i64::from(d)));
            let arr = cumulative(arr.into_iter());
            (0..h).map(|t| i64::from(lot.initial_occupancy) - dep[t] + arr[t]).collect()
        })
        .collect()
}

/// Runs the scenario step by step in `mode`.
///
/// At step `k` the pending drivers are those with `request_time <= k <
/// arrival_time`. A driver's reservation when it arrives becomes final;
/// a driver never holding one is reported unassigned.
pub fn simulate(scenario: &Scenario, mode: Mode, params: &MinEnvyParams) -> Result<Outcome, SmartParkError> {
    scenario.validate()?;
    let spec = UtilitySpec::from_scenario(scenario);
    let n = scenario.drivers.len();
    let n_lots = scenario.lots.len();
    let mut costs = Vec::with_capacity(n);
    for r in 0..n {
        costs.push((0..n_lots).map(|l| utility(&spec, r, l)).collect::<Result<Vec<f64>, _>>()?);
    }

    let mut reservation: Vec<Option<usize>> = vec![None; n];
    let mut final_lot: Vec<Option<usize>> = vec![None; n];
    let mut history = Vec::new();
    for k in 1..=scenario.horizon {
        for (r, d) in scenario.drivers.iter().enumerate() {
            if d.arrival_time == k {
                final_lot[r] = reservation[r];
            }
        }
        let pending: Vec<PendingDriver> = scenario
            .drivers
            .iter()
            .take_while(|d| d.request_time <= k)
            .filter(|d| k < d.arrival_time)
            .map(|d| PendingDriver {
                driver: d.id,
                arrival: d.arrival_time,
                costs: costs[d.id].clone(),
                previous: reservation[d.id],
            })
            .collect();
        if pending.is_empty() {
            continue;
        }
        let committed = scenario.drivers.iter().filter(|d| d.arrival_time <= k);
        let occ = occupancy(scenario, committed.filter_map(|d| final_lot[d.id].map(|l| (d.id, l))));
        let caps: Vec<Vec<i64>> = scenario
            .lots
            .iter()
            .zip(&occ)
            .map(|(lot, row)| row.iter().map(|&o| i64::from(lot.capacity) - o).collect())
            .collect();
        let previous: Vec<Option<usize>> = pending.iter().map(|p| p.previous).collect();
        let j_bar = step_mean(&pending, &previous);
        let out = smartpark_step(n_lots, scenario.horizon, &caps, &pending, mode, j_bar, params)?;
        for (p, &c) in pending.iter().zip(&out.choice) {
            reservation[p.driver] = c;
        }
        history.push(StepRecord {
            step: k,
            reservations: pending
                .iter()
                .zip(&out.choice)
                .map(|(p, &c)| (p.driver, c, c.map_or(UNASSIGNED_COST, |l| p.costs[l])))
                .collect(),
            j_bar,
            iterations: out.iterations,
        });
    }

    let utility: Vec<f64> =
        final_lot.iter().enumerate().map(|(r, c)| c.map_or(UNASSIGNED_COST, |l| costs[r][l])).collect();
    let walk_hours: Vec<Option<f64>> = final_lot
        .iter()
        .enumerate()
        .map(|(r, c)| c.map(|l| spec.distance[l][r] / scenario.walking_speed))
        .collect();
    let metrics = if n == 0 {
        None
    } else {
        let walks: Vec<f64> = walk_hours.iter().flatten().copied().collect();
        let jains = jains_index(&utility)?;
        let assigned = walks.len();
        Some(SimMetrics {
            n_drivers: n,
            assigned,
            unassigned: n - assigned,
            mean_envy: mean_envy(&utility)?,
            mean_utility: mean_walk(&utility)?,
            jains: jains.value(),
            jains_degenerate: matches!(jains, Jains::Degenerate),
            walk_mean_envy: mean_envy(&walks).ok(),
            walk_mean: mean_walk(&walks).ok(),
        })
    };
    Ok(Outcome { mode, final_lot, utility, walk_hours, history, metrics })
}

/// A driver whose reservation got worse (or was dropped) between consecutive
/// steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostIncrease {
    pub driver: usize,
    pub step: u32,
    pub previous: f64,
    pub current: Option<f64>,
}

pub fn check_cost_improvement(outcome: &Outcome) -> Vec<CostIncrease> {
    let mut last: Vec<Option<f64>> = vec![None; outcome.final_lot.len()];
    let mut out = Vec::new();
    for record in &outcome.history {
        for &(r, lot, cost) in &record.reservations {
            let current = lot.map(|_| cost);
            if let Some(previous) = last[r] {
                if current.is_none_or(|c| c > previous) {
                    out.push(CostIncrease { driver: r, step: record.step, previous, current });
                }
            }
            last[r] = current;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReservationOverflow {
    pub step: u32,
    pub lot: usize,
    pub period: u32,
    pub occupancy: i64,
    pub capacity: u32,
}

/// Recounts, after every step, committed vehicles plus live reservations
/// against each lot's capacity over the whole horizon.
pub fn check_reservations(scenario: &Scenario, outcome: &Outcome) -> Vec<ReservationOverflow> {
    let mut out = Vec::new();
    for record in &outcome.history {
        let committed = scenario
            .drivers
            .iter()
            .filter(|d| d.arrival_time <= record.step)
            .filter_map(|d| outcome.final_lot[d.id].map(|l| (d.id, l)));
        let reserved = record.reservations.iter().filter_map(|&(r, l, _)| l.map(|l| (r, l)));
        let occ = occupancy(scenario, committed.chain(reserved));
        for (l, row) in occ.iter().enumerate() {
            for (t, &o) in row.iter().enumerate() {
                if o > i64::from(scenario.lots[l].capacity) {
                    out.push(ReservationOverflow {
                        step: record.step,
                        lot: l,
                        period: t as u32 + 1,
                        occupancy: o,
                        capacity: scenario.lots[l].capacity,
                    });
                }
            }
        }
    }
    out
}
