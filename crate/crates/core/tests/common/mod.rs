#![allow(dead_code)]

use fairpark::model::{Instance, Lot, Point, Trip};
use fairpark::rng;
use rand::RngExt;

pub type Rng = rng::Rng;

pub fn rng(seed: u64) -> Rng {
    rng::seeded(seed)
}

fn grid_point(r: &mut Rng) -> Point {
    Point::new(r.random_range(0..=10) as f64, r.random_range(0..=10) as f64)
}

/// A random instance within the given size bounds, with small capacities.
pub fn tiny_instance(r: &mut Rng, max_drivers: usize, max_lots: usize, max_horizon: u32) -> Instance {
    let n_lots = r.random_range(1..=max_lots);
    let horizon = r.random_range(1..=max_horizon);
    let n_drivers = r.random_range(1..=max_drivers);
    let lots = (0..n_lots)
        .map(|id| {
            let capacity = r.random_range(0..=4);
            Lot { id, location: grid_point(r), capacity, initial_occupancy: r.random_range(0..=capacity) }
        })
        .collect();
    let trips = (0..n_drivers)
        .map(|id| {
            let start_period = r.random_range(1..=horizon);
            Trip {
                id,
                origin: grid_point(r),
                destination: grid_point(r),
                start_period,
                end_period: r.random_range(start_period..=horizon),
            }
        })
        .collect();
    Instance::new(trips, lots, horizon, r.random_range(1..=4) as f64).expect("valid by construction")
}

/// Occupancy recount written from the definition: initial cars, minus trips
/// that have left their pickup lot by `t`, plus drivers assigned to the lot
/// whose trip has ended by `t`.
pub fn fits(instance: &Instance, lots: &[usize]) -> bool {
    let origin = instance.origin_lot();
    instance.lots().iter().enumerate().all(|(l, lot)| {
        (1..=instance.horizon()).all(|t| {
            let left = instance.trips().iter().enumerate().filter(|(r, trip)| origin[*r] == l && trip.start_period <= t).count();
            let came = instance.trips().iter().enumerate().filter(|(r, trip)| lots[*r] == l && trip.end_period <= t).count();
            lot.initial_occupancy as i64 - left as i64 + came as i64 <= lot.capacity as i64
        })
    })
}

/// Calls `visit` with every vector in `{0..base}^len`.
pub fn odometer(len: usize, base: usize, mut visit: impl FnMut(&[usize])) {
    if base == 0 && len > 0 {
        return;
    }
    let mut digits = vec![0usize; len];
    loop {
        visit(&digits);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            digits[i] += 1;
            if digits[i] < base {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

pub fn random_beta(r: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(0.0..3.0)).collect()
}
