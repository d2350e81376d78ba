//! Lloyd's k-means with farthest-point seeding, used to place lots at the
//! centroids of destination clusters.

use rand::RngExt;

use super::DataError;
use crate::model::Point;
use crate::rng;

const MAX_ITERS: usize = 100;
const SHIFT_TOL: f64 = 1e-9;

fn sq_dist(a: &Point, b: &Point) -> f64 {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    dx * dx + dy * dy
}

fn nearest(p: &Point, centers: &[Point]) -> usize {
    let mut best = 0;
    for (k, c) in centers.iter().enumerate().skip(1) {
        if sq_dist(p, c) < sq_dist(p, &centers[best]) {
            best = k;
        }
    }
    best
}

fn distinct_count(points: &[Point]) -> usize {
    let mut keys: Vec<(u64, u64)> = points.iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn within_cluster_ss(points: &[Point], centers: &[Point], labels: &[usize]) -> f64 {
    points.iter().zip(labels).map(|(p, &k)| sq_dist(p, &centers[k])).sum()
}

/// Returns `k` centroids. The first seed is a uniformly drawn point, each
/// further seed is the point farthest from the seeds chosen so far.
pub fn kmeans_lots(points: &[Point], k: usize, seed: u64) -> Result<Vec<Point>, DataError> {
    let distinct = distinct_count(points);
    if k == 0 || distinct < k {
        return Err(DataError::TooFewPoints { k, distinct });
    }
    let mut rng = rng::seeded(seed);
    let mut centers = vec![points[rng.random_range(0..points.len())]];
    let mut min_d: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let far = argmax(&min_d);
        let c = points[far];
        centers.push(c);
        for (d, p) in min_d.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
    }

    let mut labels = vec![0usize; points.len()];
    for _ in 0..MAX_ITERS {
        for (label, p) in labels.iter_mut().zip(points) {
            *label = nearest(p, &centers);
        }
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (p, &label) in points.iter().zip(&labels) {
            let s = &mut sums[label];
            s.0 += p.x;
            s.1 += p.y;
            s.2 += 1;
        }
        let mut next: Vec<Point> = sums
            .iter()
            .zip(&centers)
            .map(|(&(sx, sy, n), &old)| if n == 0 { old } else { Point::new(sx / n as f64, sy / n as f64) })
            .collect();
        for j in 0..k {
            if sums[j].2 == 0 {
                // reseed at the point worst served by the current centroids
                let err: Vec<f64> = points.iter().zip(&labels).map(|(p, &l)| sq_dist(p, &next[l])).collect();
                let far = argmax(&err);
                next[j] = points[far];
                labels[far] = j;
            }
        }
        let shift = centers.iter().zip(&next).map(|(a, b)| sq_dist(a, b).sqrt()).fold(0.0, f64::max);
        centers = next;
        if shift < SHIFT_TOL {
            break;
        }
    }
    Ok(centers)
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Labels of `points` under nearest-centroid assignment.
pub fn assign_labels(points: &[Point], centers: &[Point]) -> Vec<usize> {
    points.iter().map(|p| nearest(p, centers)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(1.0, 3.0)];
        let c = kmeans_lots(&pts, 1, 9).unwrap();
        assert!((c[0].x - 1.0).abs() < 1e-12 && (c[0].y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separated_blobs() {
        let mut pts = Vec::new();
        for i in 0..10 {
            let f = i as f64 * 0.01;
            pts.push(Point::new(f, f));
            pts.push(Point::new(10.0 + f, 10.0 - f));
        }
        for seed in 0..5 {
            let mut c = kmeans_lots(&pts, 2, seed).unwrap();
            c.sort_by(|a, b| a.x.total_cmp(&b.x));
            assert!(c[0].x <= 0.09 && c[0].y <= 0.09 && c[0].x >= 0.0);
            assert!(c[1].x >= 10.0 && c[1].x <= 10.09 && c[1].y >= 9.91);
        }
    }

    #[test]
    fn too_few_distinct_points() {
        let pts = [Point::new(1.0, 1.0); 5];
        assert!(matches!(kmeans_lots(&pts, 2, 0), Err(DataError::TooFewPoints { k: 2, distinct: 1 })));
    }

    #[test]
    fn deterministic_given_seed() {
        let pts: Vec<Point> = (0..40).map(|i| Point::new((i * 7 % 13) as f64, (i * 5 % 11) as f64)).collect();
        assert_eq!(kmeans_lots(&pts, 4, 3).unwrap(), kmeans_lots(&pts, 4, 3).unwrap());
    }
}
