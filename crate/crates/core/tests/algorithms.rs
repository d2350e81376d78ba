mod common;

use fairpark::algos::{min_envy, min_sum, no_scheme, run_method, Initializer, Method, MinEnvyParams};
use fairpark::assign::{brute_force_assign, scale_cost, CostMatrix, FrozenSet};
use fairpark::fairness::mean_envy;
use fairpark::model::{check_feasible, Instance, Lot};

/// Replays the greedy rule with its own bookkeeping: arrivals of a period in
/// id order, after that period's departures, each to the L1-nearest lot with
/// room, lowest index on ties.
fn greedy_oracle(inst: &Instance) -> Option<Vec<usize>> {
    let mut occ: Vec<i64> = inst.lots().iter().map(|l| l.initial_occupancy as i64).collect();
    let mut lots = vec![usize::MAX; inst.n_drivers()];
    for t in 1..=inst.horizon() {
        for (trip, &o) in inst.trips().iter().zip(inst.origin_lot()) {
            if trip.start_period == t {
                occ[o] -= 1;
            }
        }
        for (d, trip) in inst.trips().iter().enumerate().filter(|(_, tr)| tr.end_period == t) {
            let mut best: Option<(f64, usize)> = None;
            for (l, lot) in inst.lots().iter().enumerate() {
                if occ[l] >= lot.capacity as i64 {
                    continue;
                }
                let dist = trip.destination.l1(&lot.location);
                if best.is_none_or(|(bd, _)| dist < bd) {
                    best = Some((dist, l));
                }
            }
            let (_, l) = best?;
            occ[l] += 1;
            lots[d] = l;
        }
    }
    Some(lots)
}

fn total(beta: &[f64]) -> f64 {
    beta.iter().sum()
}

#[test]
fn min_sum_matches_brute_force() {
    let mut r = common::rng(41);
    for _ in 0..250 {
        let inst = common::tiny_instance(&mut r, 7, 3, 5);
        let costs = CostMatrix::walking_times(&inst);
        let brute = brute_force_assign(&inst, &costs, &FrozenSet::empty(inst.n_drivers())).unwrap();
        let ours = min_sum(&inst).unwrap();
        let scaled: i64 = ours.beta.iter().map(|&b| scale_cost(b)).sum();
        assert_eq!(scaled, brute.scaled_cost);
        assert!(check_feasible(&inst, &ours).is_feasible());
    }
}

#[test]
fn no_scheme_matches_replay() {
    let mut r = common::rng(42);
    let (mut placed, mut stuck) = (0, 0);
    for _ in 0..400 {
        let inst = common::tiny_instance(&mut r, 8, 4, 6);
        match (no_scheme(&inst), greedy_oracle(&inst)) {
            (Ok(a), Some(lots)) => {
                assert_eq!(a.dest_lot, lots);
                assert!(check_feasible(&inst, &a).is_feasible());
                placed += 1;
            }
            (Err(_), None) => stuck += 1,
            (a, o) => panic!("no_scheme {a:?} vs replay {o:?}"),
        }
    }
    assert!(placed > 300, "{placed} placed, {stuck} stuck");
}

#[test]
fn min_sum_never_walks_more_than_greedy() {
    let mut r = common::rng(43);
    for _ in 0..300 {
        let inst = common::tiny_instance(&mut r, 10, 4, 6);
        if let Ok(g) = no_scheme(&inst) {
            let m = min_sum(&inst).unwrap();
            assert!(total(&m.beta) <= total(&g.beta) + 1e-9);
        }
    }
}

#[test]
fn more_capacity_never_hurts_min_sum() {
    let mut r = common::rng(44);
    for _ in 0..200 {
        let inst = common::tiny_instance(&mut r, 8, 4, 6);
        let lots: Vec<Lot> = inst.lots().iter().map(|l| Lot { capacity: l.capacity + 1, ..l.clone() }).collect();
        let bigger = Instance::new(inst.trips().to_vec(), lots, inst.horizon(), inst.walking_speed()).unwrap();
        assert!(total(&min_sum(&bigger).unwrap().beta) <= total(&min_sum(&inst).unwrap().beta) + 1e-9);
    }
}

#[test]
fn min_envy_trace_invariants() {
    let mut r = common::rng(45);
    for init in [Initializer::MinSum, Initializer::NoScheme] {
        for _ in 0..200 {
            let inst = common::tiny_instance(&mut r, 8, 3, 5);
            let params = MinEnvyParams { maxiter: 6, init, ..MinEnvyParams::default() };
            let Ok((a, trace)) = min_envy(&inst, &params) else {
                assert_eq!(init, Initializer::NoScheme);
                continue;
            };
            assert!(trace.iterations.len() <= params.maxiter as usize + 1);
            assert!(!trace.iterations.is_empty());
            assert!(trace.records().all(|rec| rec.feasible));
            assert!(trace.iterations.iter().all(|rec| rec.subproblem_scaled <= rec.retained_scaled));
            assert!(check_feasible(&inst, &a).is_feasible());
            let last = trace.final_record();
            assert_eq!(last.mean_envy, mean_envy(&a.beta).unwrap());
            assert_eq!(trace.to_csv().lines().count(), trace.iterations.len() + 2);
        }
    }
}

#[test]
fn run_method_dispatches() {
    let mut r = common::rng(46);
    let inst = common::tiny_instance(&mut r, 6, 3, 4);
    let params = MinEnvyParams::default();
    for m in Method::ALL {
        let (a, trace) = run_method(&inst, m, &params).unwrap();
        assert_eq!(trace.is_some(), m == Method::MinEnvy);
        assert_eq!(a.n_drivers(), inst.n_drivers());
    }
}

/// Share of tiny six-driver, three-lot instances on which the final envy is
/// no worse than the starting envy.
#[test]
fn min_envy_rarely_worsens_tiny_instances() {
    let mut r = common::rng(47);
    let (mut ok, mut n) = (0, 0);
    while n < 500 {
        let inst = common::tiny_instance(&mut r, 6, 3, 5);
        if inst.n_drivers() != 6 || inst.n_lots() != 3 {
            continue;
        }
        let (_, trace) = min_envy(&inst, &MinEnvyParams::default()).unwrap();
        n += 1;
        if trace.final_record().mean_envy <= trace.initial.mean_envy + 1e-12 {
            ok += 1;
        }
    }
    let share = ok as f64 / n as f64;
    println!("final envy <= initial envy on {ok}/{n} instances ({:.1}%)", 100.0 * share);
    assert!(share >= 0.95, "{ok}/{n}");
}
