//! GTFS ingestion: one connection per route.
//!
//! For each route the trip with the smallest `trip_id` is taken, its stops
//! ordered by `stop_sequence` and consecutive repeats collapsed. Stop ids
//! are used verbatim as station tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{Instance, ModelError};

#[derive(Debug, Error)]
pub enum GtfsError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{file}: missing required column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("{file}, line {line}: {reason}")]
    BadRow { file: String, line: u64, reason: String },
    #[error("{file}, line {line}: trip `{trip}` references unknown stop `{stop}`")]
    UnknownStop {
        file: String,
        line: u64,
        trip: String,
        stop: String,
    },
    #[error("{file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

struct Table {
    name: String,
    reader: csv::Reader<File>,
    columns: Vec<usize>,
}

impl Table {
    fn open(dir: &Path, name: &str, required: &[&str]) -> Result<Self, GtfsError> {
        let path = dir.join(name);
        let file = File::open(&path).map_err(|_| GtfsError::MissingFile(path.clone()))?;
        let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(file);
        let headers = reader
            .headers()
            .map_err(|source| GtfsError::Csv {
                file: name.to_string(),
                source,
            })?
            .clone();
        let header_names: Vec<String> = headers
            .iter()
            .map(|h| h.trim_start_matches('\u{feff}').trim().to_string())
            .collect();
        let mut columns = Vec::new();
        for col in required {
            let idx = header_names
                .iter()
                .position(|h| h == col)
                .ok_or_else(|| GtfsError::MissingColumn {
                    file: name.to_string(),
                    column: col.to_string(),
                })?;
            columns.push(idx);
        }
        Ok(Self {
            name: name.to_string(),
            reader,
            columns,
        })
    }

    /// Calls `f(line, fields)` with the required fields of each row, in the
    /// order they were requested. Empty required fields are an error.
    fn for_each<F>(&mut self, required: &[&str], mut f: F) -> Result<(), GtfsError>
    where
        F: FnMut(u64, &[&str]) -> Result<(), GtfsError>,
    {
        let mut record = csv::StringRecord::new();
        let mut fields: Vec<String> = Vec::with_capacity(self.columns.len());
        loop {
            let more = self.reader.read_record(&mut record).map_err(|source| GtfsError::Csv {
                file: self.name.clone(),
                source,
            })?;
            if !more {
                return Ok(());
            }
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(str::is_empty) {
                continue;
            }
            fields.clear();
            for (k, &idx) in self.columns.iter().enumerate() {
                match record.get(idx) {
                    Some(v) if !v.is_empty() => fields.push(v.to_string()),
                    _ => {
                        return Err(GtfsError::BadRow {
                            file: self.name.clone(),
                            line,
                            reason: format!("missing value for `{}`", required[k]),
                        })
                    }
                }
            }
            let refs: Vec<&str> = fields.iter().map(String::as_str).collect();
            f(line, &refs)?;
        }
    }
}

/// Loads a GTFS directory (`stops.txt`, `routes.txt`, `trips.txt`,
/// `stop_times.txt`) as an instance with one connection per route.
/// Routes without trips, or whose chosen trip has no stop times, are
/// skipped with a warning.
pub fn load_gtfs(dir: &Path) -> Result<Instance, GtfsError> {
    const STOPS: [&str; 1] = ["stop_id"];
    const ROUTES: [&str; 1] = ["route_id"];
    const TRIPS: [&str; 2] = ["route_id", "trip_id"];
    const STOP_TIMES: [&str; 3] = ["trip_id", "stop_id", "stop_sequence"];

    let mut known_stops = BTreeSet::new();
    Table::open(dir, "stops.txt", &STOPS)?.for_each(&STOPS, |_, f| {
        known_stops.insert(f[0].to_string());
        Ok(())
    })?;

    let mut routes: Vec<String> = Vec::new();
    Table::open(dir, "routes.txt", &ROUTES)?.for_each(&ROUTES, |_, f| {
        routes.push(f[0].to_string());
        Ok(())
    })?;

    // route -> smallest trip id
    let mut chosen: BTreeMap<String, String> = BTreeMap::new();
    Table::open(dir, "trips.txt", &TRIPS)?.for_each(&TRIPS, |_, f| {
        let entry = chosen.entry(f[0].to_string()).or_insert_with(|| f[1].to_string());
        if f[1] < entry.as_str() {
            *entry = f[1].to_string();
        }
        Ok(())
    })?;
    let selected: HashMap<&str, &str> = chosen.iter().map(|(r, t)| (t.as_str(), r.as_str())).collect();

    // trip -> (stop_sequence, file order, stop)
    let mut stop_lists: HashMap<String, Vec<(u64, usize, String)>> = HashMap::new();
    let mut row = 0usize;
    Table::open(dir, "stop_times.txt", &STOP_TIMES)?.for_each(&STOP_TIMES, |line, f| {
        row += 1;
        if !selected.contains_key(f[0]) {
            return Ok(());
        }
        if !known_stops.contains(f[1]) {
            return Err(GtfsError::UnknownStop {
                file: "stop_times.txt".into(),
                line,
                trip: f[0].to_string(),
                stop: f[1].to_string(),
            });
        }
        let seq: u64 = f[2].parse().map_err(|_| GtfsError::BadRow {
            file: "stop_times.txt".into(),
            line,
            reason: format!("invalid stop_sequence `{}`", f[2]),
        })?;
        stop_lists
            .entry(f[0].to_string())
            .or_default()
            .push((seq, row, f[1].to_string()));
        Ok(())
    })?;

    let mut connections: Vec<Vec<String>> = Vec::new();
    let mut route_order: Vec<&String> = routes.iter().collect();
    // Routes appearing only in trips.txt still count.
    for r in chosen.keys() {
        if !routes.contains(r) {
            log::warn!("route `{r}` appears in trips.txt but not routes.txt");
            route_order.push(r);
        }
    }
    for route in route_order {
        let Some(trip) = chosen.get(route) else {
            log::warn!("route `{route}` has no trips; skipped");
            continue;
        };
        let Some(mut stops) = stop_lists.remove(trip) else {
            log::warn!("trip `{trip}` of route `{route}` has no stop times; skipped");
            continue;
        };
        stops.sort();
        let mut seq: Vec<String> = Vec::with_capacity(stops.len());
        for (_, _, stop) in stops {
            if seq.last() != Some(&stop) {
                seq.push(stop);
            }
        }
        connections.push(seq);
    }
    Ok(Instance::from_connections(connections)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_feed(dir: &Path, trips: &str, stop_times: &str) {
        fs::write(dir.join("stops.txt"), "stop_id,stop_name\nA,a\nB,b\nC,c\nD,d\n").unwrap();
        fs::write(dir.join("routes.txt"), "route_id,route_short_name\nR1,1\nR2,2\n").unwrap();
        fs::write(dir.join("trips.txt"), trips).unwrap();
        fs::write(dir.join("stop_times.txt"), stop_times).unwrap();
    }

    #[test]
    fn one_connection_per_route_ordered_by_sequence() {
        let dir = tempfile::tempdir().unwrap();
        write_feed(
            dir.path(),
            "route_id,service_id,trip_id\nR1,x,t2\nR1,x,t1\nR2,x,u1\n",
            "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n\
             t1,,,C,3\nt1,,,A,1\nt1,,,B,2\nt2,,,D,1\nu1,,,C,1\nu1,,,C,2\nu1,,,D,3\n",
        );
        let inst = load_gtfs(dir.path()).unwrap();
        assert_eq!(crate::model::write_hsd(&inst), "A B C\nC D\n");
    }

    #[test]
    fn missing_route_id_value_names_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        write_feed(
            dir.path(),
            "route_id,service_id,trip_id\nR1,x,t1\n,x,t9\n",
            "trip_id,stop_id,stop_sequence\nt1,A,1\n",
        );
        let err = load_gtfs(dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("trips.txt") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn unknown_stop_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        write_feed(dir.path(), "route_id,trip_id\nR1,t1\n", "trip_id,stop_id,stop_sequence\nt1,Q,1\n");
        assert!(matches!(load_gtfs(dir.path()), Err(GtfsError::UnknownStop { .. })));
        fs::remove_file(dir.path().join("routes.txt")).unwrap();
        assert!(matches!(load_gtfs(dir.path()), Err(GtfsError::MissingFile(_))));
    }

    #[test]
    fn missing_column() {
        let dir = tempfile::tempdir().unwrap();
        write_feed(dir.path(), "route_id,trip\nR1,t1\n", "trip_id,stop_id,stop_sequence\n");
        assert!(matches!(
            load_gtfs(dir.path()),
            Err(GtfsError::MissingColumn { ref column, .. }) if column == "trip_id"
        ));
    }

    #[test]
    fn route_without_trips_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        write_feed(dir.path(), "route_id,trip_id\nR1,t1\n", "trip_id,stop_id,stop_sequence\nt1,A,1\nt1,B,2\n");
        let inst = load_gtfs(dir.path()).unwrap();
        assert_eq!(inst.connection_count(), 1);
    }
}
