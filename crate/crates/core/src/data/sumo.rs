//! SUMO-style trip files.
//!
//! Expected layout: any root element containing `<trip>` (or `<vehicle>`)
//! elements with a numeric `depart` time in seconds and geographic endpoints
//! in `fromLonLat="lon,lat"` / `toLonLat="lon,lat"`. An optional numeric
//! `arrival` attribute gives the end time; otherwise the trip ends
//! `default_duration` seconds after departure.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DataError, GeoPoint, Parsed, RawTrip, Region};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SumoConfig {
    /// Seconds added to `depart` when a trip has no `arrival`.
    pub default_duration: f64,
    pub region: Option<Region>,
}

impl Default for SumoConfig {
    fn default() -> Self {
        Self { default_duration: 900.0, region: None }
    }
}

fn lon_lat(value: Option<&str>) -> Option<GeoPoint> {
    let (lon, lat) = value?.split_once(',')?;
    let lon = lon.trim().parse::<f64>().ok().filter(|v| v.is_finite())?;
    let lat = lat.trim().parse::<f64>().ok().filter(|v| v.is_finite())?;
    Some(GeoPoint { lon, lat })
}

fn seconds(value: Option<&str>) -> Option<f64> {
    value?.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_sumo_xml(text: &str, config: &SumoConfig) -> Result<Parsed, DataError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| DataError::Xml(e.to_string()))?;
    let mut out = Parsed::default();
    for node in doc.descendants().filter(|n| n.has_tag_name("trip") || n.has_tag_name("vehicle")) {
        let trip = (|| {
            let depart = seconds(node.attribute("depart"))?;
            let arrival = match node.attribute("arrival") {
                Some(a) => seconds(Some(a))?,
                None => depart + config.default_duration,
            };
            let pickup = lon_lat(node.attribute("fromLonLat"))?;
            let dropoff = lon_lat(node.attribute("toLonLat"))?;
            let inside = config.region.is_none_or(|r| r.contains(&pickup) && r.contains(&dropoff));
            (arrival >= depart && inside).then_some(RawTrip {
                pickup_time: depart,
                dropoff_time: arrival,
                pickup,
                dropoff,
            })
        })();
        match trip {
            Some(t) => out.trips.push(t),
            None => out.dropped += 1,
        }
    }
    Ok(out)
}

pub fn parse_sumo_trips(path: impl AsRef<Path>, config: &SumoConfig) -> Result<Parsed, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    parse_sumo_xml(&text, config)
}
