use serde::{Deserialize, Serialize};

use super::{GeoPoint, RawTrip, Region};
use crate::model::Point;

/// Statute miles per degree of latitude (and of longitude at the equator).
pub const MILES_PER_DEGREE: f64 = 69.17;

const EARTH_RADIUS_MILES: f64 = 3958.8;

/// Equirectangular projection about `center`, in miles.
pub fn project(p: &GeoPoint, center: &GeoPoint) -> Point {
    let cos_lat0 = center.lat.to_radians().cos();
    Point::new(
        (p.lon - center.lon) * cos_lat0 * MILES_PER_DEGREE,
        (p.lat - center.lat) * MILES_PER_DEGREE,
    )
}

pub fn haversine_miles(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_MILES * h.sqrt().asin()
}

/// A trip on the plane: positions in miles, times still in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarTrip {
    pub origin: Point,
    pub destination: Point,
    pub start_time: f64,
    pub end_time: f64,
}

pub fn project_to_plane(trips: &[RawTrip], region: &Region) -> Vec<PlanarTrip> {
    let center = region.center();
    trips
        .iter()
        .map(|t| PlanarTrip {
            origin: project(&t.pickup, &center),
            destination: project(&t.dropoff, &center),
            start_time: t.pickup_time,
            end_time: t.dropoff_time,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_maps_to_origin() {
        let c = Region::NYC.center();
        assert_eq!(project(&c, &c), Point::new(0.0, 0.0));
    }

    #[test]
    fn one_degree_north() {
        let c = Region::NYC.center();
        let p = project(&GeoPoint { lon: c.lon, lat: c.lat + 1.0 }, &c);
        assert_eq!(p.x, 0.0);
        assert!((p.y - 69.17).abs() < 1e-9);
    }

    #[test]
    fn agrees_with_haversine_at_city_scale() {
        let c = Region::NYC.center();
        let east = GeoPoint { lon: c.lon + 0.01, lat: c.lat };
        let d = project(&east, &c).x;
        let h = haversine_miles(&c, &east);
        assert!((d - h).abs() / h < 0.01, "{d} vs {h}");
    }
}
