use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{DataError, GeoPoint, Parsed, RawTrip, Region};

/// Column mapping for taxi-style trip tables. Header names are matched after
/// trimming whitespace. `time_format` is a strftime pattern, or `"seconds"`
/// for plain numeric timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub pickup_time: String,
    pub dropoff_time: String,
    pub pickup_lon: String,
    pub pickup_lat: String,
    pub dropoff_lon: String,
    pub dropoff_lat: String,
    pub time_format: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            pickup_time: "pickup_datetime".into(),
            dropoff_time: "dropoff_datetime".into(),
            pickup_lon: "pickup_longitude".into(),
            pickup_lat: "pickup_latitude".into(),
            dropoff_lon: "dropoff_longitude".into(),
            dropoff_lat: "dropoff_latitude".into(),
            time_format: "%Y-%m-%d %H:%M:%S".into(),
        }
    }
}

impl CsvSchema {
    fn parse_time(&self, field: &str) -> Option<f64> {
        let field = field.trim();
        if self.time_format == "seconds" {
            return field.parse::<f64>().ok().filter(|v| v.is_finite());
        }
        NaiveDateTime::parse_from_str(field, &self.time_format)
            .ok()
            .map(|t| t.and_utc().timestamp() as f64)
    }

    fn format_time(&self, secs: f64) -> String {
        if self.time_format == "seconds" {
            return secs.to_string();
        }
        DateTime::from_timestamp(secs.floor() as i64, 0)
            .map(|t| t.naive_utc().format(&self.time_format).to_string())
            .unwrap_or_default()
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, DataError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| DataError::MissingColumn(name.to_string()))
}

fn coord(field: Option<&str>) -> Option<f64> {
    field?.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_trip_csv_reader<R: Read>(reader: R, schema: &CsvSchema, region: &Region) -> Result<Parsed, DataError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = [
        column(&headers, &schema.pickup_time)?,
        column(&headers, &schema.dropoff_time)?,
        column(&headers, &schema.pickup_lon)?,
        column(&headers, &schema.pickup_lat)?,
        column(&headers, &schema.dropoff_lon)?,
        column(&headers, &schema.dropoff_lat)?,
    ];
    let mut out = Parsed::default();
    for row in rdr.records() {
        let Ok(row) = row else {
            out.dropped += 1;
            continue;
        };
        let trip = (|| {
            let pickup_time = schema.parse_time(row.get(cols[0])?)?;
            let dropoff_time = schema.parse_time(row.get(cols[1])?)?;
            let pickup = GeoPoint { lon: coord(row.get(cols[2]))?, lat: coord(row.get(cols[3]))? };
            let dropoff = GeoPoint { lon: coord(row.get(cols[4]))?, lat: coord(row.get(cols[5]))? };
            let ok = dropoff_time >= pickup_time && region.contains(&pickup) && region.contains(&dropoff);
            ok.then_some(RawTrip { pickup_time, dropoff_time, pickup, dropoff })
        })();
        match trip {
            Some(t) => out.trips.push(t),
            None => out.dropped += 1,
        }
    }
    Ok(out)
}

/// Reads a trip table, dropping (and counting) rows with unparseable fields,
/// points outside `region`, or a drop-off before the pickup.
pub fn parse_trip_csv(path: impl AsRef<Path>, schema: &CsvSchema, region: &Region) -> Result<Parsed, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    parse_trip_csv_reader(file, schema, region)
}

/// Writes trips in the layout `parse_trip_csv` reads with the same schema.
pub fn write_trip_csv<W: Write>(writer: W, trips: &[RawTrip], schema: &CsvSchema) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        &schema.pickup_time,
        &schema.dropoff_time,
        &schema.pickup_lon,
        &schema.pickup_lat,
        &schema.dropoff_lon,
        &schema.dropoff_lat,
    ])?;
    for t in trips {
        w.write_record([
            schema.format_time(t.pickup_time),
            schema.format_time(t.dropoff_time),
            t.pickup.lon.to_string(),
            t.pickup.lat.to_string(),
            t.dropoff.lon.to_string(),
            t.dropoff.lat.to_string(),
        ])?;
    }
    w.flush().map_err(|source| DataError::Io { path: "<writer>".into(), source })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "vendor_id, pickup_datetime, dropoff_datetime, pickup_longitude, pickup_latitude, dropoff_longitude, dropoff_latitude\n";

    #[test]
    fn drops_corrupt_row() {
        let text = format!(
            "{HEADER}\
             CMT,2013-01-01 15:11:48,2013-01-01 15:18:10,-73.978165,40.757977,-73.989838,40.751171\n\
             CMT,2013-01-06 00:18:35,2013-01-06 00:22:54,-74.00x,40.731781,-73.994499,40.75066\n\
             VTS,2013-01-05 18:49:41,2013-01-05 18:54:23,-73.955925,40.781887,-73.963181,40.777832\n"
        );
        let parsed = parse_trip_csv_reader(text.as_bytes(), &CsvSchema::default(), &Region::NYC).unwrap();
        assert_eq!(parsed.trips.len(), 2);
        assert_eq!(parsed.dropped, 1);
        assert_eq!(parsed.trips[0].pickup.lon, -73.978165);
        assert_eq!(parsed.trips[0].dropoff_time - parsed.trips[0].pickup_time, 382.0);
    }

    #[test]
    fn drops_out_of_region_and_reversed_rows() {
        let text = format!(
            "{HEADER}\
             CMT,2013-01-01 15:11:48,2013-01-01 15:18:10,0.0,0.0,-73.989838,40.751171\n\
             CMT,2013-01-01 15:11:48,2013-01-01 15:01:10,-73.978165,40.757977,-73.989838,40.751171\n"
        );
        let parsed = parse_trip_csv_reader(text.as_bytes(), &CsvSchema::default(), &Region::NYC).unwrap();
        assert!(parsed.trips.is_empty());
        assert_eq!(parsed.dropped, 2);
    }

    #[test]
    fn header_only_file() {
        let parsed = parse_trip_csv_reader(HEADER.as_bytes(), &CsvSchema::default(), &Region::NYC).unwrap();
        assert_eq!(parsed, Parsed::default());
    }

    #[test]
    fn missing_column() {
        let err = parse_trip_csv_reader("a,b\n1,2\n".as_bytes(), &CsvSchema::default(), &Region::NYC).unwrap_err();
        assert!(matches!(err, DataError::MissingColumn(c) if c == "pickup_datetime"));
    }

    #[test]
    fn missing_file() {
        let err = parse_trip_csv("/nonexistent/trips.csv", &CsvSchema::default(), &Region::NYC).unwrap_err();
        assert!(matches!(err, DataError::Io { .. }));
    }
}
