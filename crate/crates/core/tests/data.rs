mod common;

use std::collections::BTreeMap;
use std::path::Path;

use fairpark::data::{
    gen_capacities, haversine_miles, kmeans_lots, parse_sumo_trips, parse_trip_csv, parse_trip_csv_reader, project,
    sample_trial, synthetic_trips, within_cluster_ss, write_trip_csv, CsvSchema, DataError, GeoPoint, Region, SumoConfig,
    SynthConfig, TrialConfig, MILES_PER_DEGREE,
};
use fairpark::model::Point;
use rand::RngExt;

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Upper 0.1% point of the chi-square distribution (Wilson-Hilferty).
fn chi2_critical(df: usize) -> f64 {
    let k = df as f64;
    let z = 3.090_232;
    k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3)
}

fn chi2_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

#[test]
fn nyc_fixture_rows() {
    let parsed = parse_trip_csv(fixture("nyc_trips.csv"), &CsvSchema::default(), &Region::NYC).unwrap();
    assert_eq!(parsed.trips.len(), 40);
    assert_eq!(parsed.dropped, 3);
    let first = parsed.trips[0];
    // 2013-01-15 00:30:06 and 00:51:03 UTC
    assert_eq!(first.pickup_time, 1_358_209_806.0);
    assert_eq!(first.dropoff_time, 1_358_211_063.0);
    assert_eq!(first.pickup, GeoPoint { lon: -73.971505, lat: 40.731125 });
    assert_eq!(first.dropoff, GeoPoint { lon: -73.945181, lat: 40.812404 });
    assert!(parsed.trips.iter().all(|t| t.dropoff_time >= t.pickup_time));
}

#[test]
fn cologne_fixture_rows() {
    let config = SumoConfig { region: Some(Region::COLOGNE), ..SumoConfig::default() };
    let parsed = parse_sumo_trips(fixture("cologne_trips.xml"), &config).unwrap();
    assert_eq!(parsed.trips.len(), 30);
    assert_eq!(parsed.dropped, 1);
    let first = parsed.trips[0];
    assert_eq!(first.pickup_time, 21804.63);
    assert_eq!(first.dropoff_time, 21804.63 + 900.0);
    assert_eq!(first.pickup, GeoPoint { lon: 6.96782, lat: 50.96446 });
    let with_arrival = parsed.trips[4];
    assert_eq!((with_arrival.pickup_time, with_arrival.dropoff_time), (22941.43, 24128.46));
}

#[test]
fn csv_edge_cases() {
    let header = "pickup_datetime,dropoff_datetime,pickup_longitude,pickup_latitude,dropoff_longitude,dropoff_latitude\n";
    let empty = parse_trip_csv_reader(header.as_bytes(), &CsvSchema::default(), &Region::NYC).unwrap();
    assert!(empty.trips.is_empty() && empty.dropped == 0);
    let rows = format!(
        "{header}2013-01-01 10:00:00,2013-01-01 10:10:00,-73.98,40.75,-73.97,40.76\n\
         2013-01-01 10:00:00,2013-01-01 10:10:00,-73.98,x,-73.97,40.76\n\
         2013-01-01 11:00:00,2013-01-01 11:10:00,-73.95,40.78,-73.96,40.79\n"
    );
    let parsed = parse_trip_csv_reader(rows.as_bytes(), &CsvSchema::default(), &Region::NYC).unwrap();
    assert_eq!((parsed.trips.len(), parsed.dropped), (2, 1));
    let missing = parse_trip_csv_reader("a,b\n1,2\n".as_bytes(), &CsvSchema::default(), &Region::NYC);
    assert!(matches!(missing, Err(DataError::MissingColumn(_))));
    assert!(parse_trip_csv(fixture("absent.csv"), &CsvSchema::default(), &Region::NYC).is_err());
}

#[test]
fn csv_round_trip() {
    let trips = synthetic_trips(&SynthConfig { n_trips: 100, ..SynthConfig::default() }, 3);
    let mut buf = Vec::new();
    write_trip_csv(&mut buf, &trips, &CsvSchema::default()).unwrap();
    let back = parse_trip_csv_reader(buf.as_slice(), &CsvSchema::default(), &Region::NYC).unwrap();
    assert_eq!(back.dropped, 0);
    assert_eq!(back.trips, trips);
}

#[test]
fn projection_agrees_with_great_circle() {
    let region = Region::NYC;
    let c = region.center();
    assert_eq!(project(&c, &c), Point::new(0.0, 0.0));
    let north = project(&GeoPoint { lon: c.lon, lat: c.lat + 1.0 }, &c);
    assert!(north.x == 0.0 && (north.y - MILES_PER_DEGREE).abs() < 1e-9);

    let mut r = common::rng(51);
    let mut point = || GeoPoint {
        lon: r.random_range(region.min_lon..region.max_lon),
        lat: r.random_range(region.min_lat..region.max_lat),
    };
    let pairs: Vec<(GeoPoint, GeoPoint)> = (0..400).map(|_| (point(), point())).collect();
    let dist: Vec<(f64, f64)> = pairs
        .iter()
        .map(|(a, b)| {
            let (pa, pb) = (project(a, &c), project(b, &c));
            let euclid = ((pa.x - pb.x).powi(2) + (pa.y - pb.y).powi(2)).sqrt();
            let h = haversine_miles(a, b);
            assert!((euclid - h).abs() <= 0.01 * h + 1e-6, "{euclid} vs {h}");
            (pa.l1(&pb), h)
        })
        .collect();
    // L1 is within a factor sqrt(2) of Euclidean, so ordering is preserved
    // whenever great-circle distances differ by more than that factor.
    for (l1a, ha) in &dist {
        for (l1b, hb) in &dist {
            if ha * 1.5 < *hb {
                assert!(l1a < l1b);
            }
        }
    }
}

#[test]
fn kmeans_beats_random_partitions() {
    let mut r = common::rng(52);
    for trial in 0..5 {
        let points: Vec<Point> = (0..30).map(|_| Point::new(r.random_range(0.0..10.0), r.random_range(0.0..10.0))).collect();
        let centers = kmeans_lots(&points, 3, trial).unwrap();
        let labels = fairpark::data::assign_labels(&points, &centers);
        let ours = within_cluster_ss(&points, &centers, &labels);
        for _ in 0..1000 {
            let labels: Vec<usize> = (0..30).map(|_| r.random_range(0..3)).collect();
            let means: Vec<Point> = (0..3)
                .map(|k| {
                    let members: Vec<&Point> = points.iter().zip(&labels).filter(|(_, l)| **l == k).map(|(p, _)| p).collect();
                    let n = members.len().max(1) as f64;
                    Point::new(members.iter().map(|p| p.x).sum::<f64>() / n, members.iter().map(|p| p.y).sum::<f64>() / n)
                })
                .collect();
            assert!(ours <= within_cluster_ss(&points, &means, &labels) + 1e-9);
        }
    }
}

#[test]
fn kmeans_small_cases() {
    let pts = [Point::new(0.0, 0.0), Point::new(2.0, 4.0), Point::new(4.0, 2.0)];
    assert_eq!(kmeans_lots(&pts, 1, 0).unwrap(), vec![Point::new(2.0, 2.0)]);
    assert!(kmeans_lots(&pts[..2], 3, 0).is_err());
    let mut blobs: Vec<Point> = (0..10).map(|i| Point::new(i as f64 * 0.1, 0.0)).collect();
    blobs.extend((0..10).map(|i| Point::new(100.0 + i as f64 * 0.1, 50.0)));
    let mut centers = kmeans_lots(&blobs, 2, 9).unwrap();
    centers.sort_by(|a, b| a.x.total_cmp(&b.x));
    assert!((0.0..=0.9).contains(&centers[0].x) && centers[0].y == 0.0);
    assert!((100.0..=100.9).contains(&centers[1].x) && centers[1].y == 50.0);
}

#[test]
fn capacity_draws_are_uniform() {
    let mut caps: BTreeMap<u32, u64> = BTreeMap::new();
    let mut occ: BTreeMap<u32, BTreeMap<u32, u64>> = BTreeMap::new();
    for seed in 0..10_000 {
        for (cap, init) in gen_capacities(100, 10, seed) {
            *caps.entry(cap).or_default() += 1;
            *occ.entry(cap).or_default().entry(init).or_default() += 1;
        }
    }
    assert_eq!(caps.keys().copied().collect::<Vec<_>>(), vec![11, 12]);
    assert_eq!(caps.values().sum::<u64>(), 100_000);
    let c: Vec<u64> = caps.values().copied().collect();
    assert!(chi2_uniform(&c) < chi2_critical(1));
    assert_eq!(occ[&11].keys().copied().collect::<Vec<_>>(), (3..=8).collect::<Vec<_>>());
    assert_eq!(occ[&12].keys().copied().collect::<Vec<_>>(), (3..=9).collect::<Vec<_>>());
    for counts in occ.values() {
        let c: Vec<u64> = counts.values().copied().collect();
        assert!(chi2_uniform(&c) < chi2_critical(c.len() - 1), "{counts:?}");
    }
}

#[test]
fn capacity_exceeds_driver_count() {
    let mut r = common::rng(53);
    for seed in 0..2000 {
        let drivers = r.random_range(0..500);
        let lots = r.random_range(1..40);
        let caps = gen_capacities(drivers, lots, seed);
        assert_eq!(caps.len(), lots);
        let total: u64 = caps.iter().map(|c| u64::from(c.0)).sum();
        let floor = (lots * (drivers / lots + 1)) as u64;
        assert!(total >= floor && floor > drivers as u64);
        if drivers % lots == 0 {
            assert!(total >= (drivers + lots) as u64);
        }
    }
}

#[test]
fn trial_sampling() {
    let pool = synthetic_trips(&SynthConfig { n_trips: 400, ..SynthConfig::default() }, 5);
    let config = TrialConfig { n_drivers: 100, seed: 77, ..TrialConfig::default() };
    let a = sample_trial(&pool, &config).unwrap();
    assert_eq!(a.to_json(), sample_trial(&pool, &config).unwrap().to_json());
    assert!(fairpark::algos::min_sum(&a).is_ok());

    let whole = sample_trial(&pool, &TrialConfig { n_drivers: 400, ..config.clone() }).unwrap();
    let center = config.region.center();
    for (t, raw) in whole.trips().iter().zip(&pool) {
        assert_eq!(t.origin, project(&raw.pickup, &center));
        assert_eq!(t.destination, project(&raw.dropoff, &center));
    }
    assert!(matches!(
        sample_trial(&pool, &TrialConfig { n_drivers: 401, ..config }),
        Err(DataError::InsufficientTrips { needed: 401, available: 400 })
    ));
}

#[test]
fn sampled_periods_follow_the_pool() {
    let pool = synthetic_trips(&SynthConfig { n_trips: 5000, ..SynthConfig::default() }, 6);
    let whole = sample_trial(&pool, &TrialConfig { n_drivers: 5000, n_lots: 10, seed: 1, ..TrialConfig::default() }).unwrap();
    for seed in 0..5 {
        let sample = sample_trial(&pool, &TrialConfig { n_drivers: 500, n_lots: 10, seed, ..TrialConfig::default() }).unwrap();
        for which in [0, 1] {
            let hist = |inst: &fairpark::model::Instance| {
                let mut h = vec![0u64; 24];
                for t in inst.trips() {
                    h[(if which == 0 { t.start_period } else { t.end_period } - 1) as usize] += 1;
                }
                h
            };
            let (p, s) = (hist(&whole), hist(&sample));
            // merge sparse bins so every expected count is at least 5
            let (mut stat, mut bins, mut e_acc, mut o_acc) = (0.0, 0usize, 0.0, 0.0);
            for (pc, sc) in p.iter().zip(&s) {
                e_acc += *pc as f64 * 500.0 / 5000.0;
                o_acc += *sc as f64;
                if e_acc >= 5.0 {
                    stat += (o_acc - e_acc).powi(2) / e_acc;
                    bins += 1;
                    e_acc = 0.0;
                    o_acc = 0.0;
                }
            }
            if e_acc > 0.0 {
                stat += (o_acc - e_acc).powi(2) / e_acc;
                bins += 1;
            }
            assert!(stat < chi2_critical(bins - 1), "seed {seed}: statistic {stat} over {bins} bins");
        }
    }
}
