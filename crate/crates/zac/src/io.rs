//! Plain CSV formats for road graphs, coordinates, demand traces and zonings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;
use zac_core::network::{BuildReport, NetworkError, RawEdge, TraceError};
use zac_core::zoning::Zoning;
use zac_core::{DemandTrace, LocationId, Request, RequestId, RoadNetwork, Seconds};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: row {row}: {msg}")]
    Row { path: PathBuf, row: usize, msg: String },
    #[error("network: {0}")]
    Network(#[from] NetworkError),
    #[error("trace: {0}")]
    Trace(#[from] TraceError),
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: path.into(), source })
}

/// Data lines as `(line number, fields)`, skipping the header and blanks.
fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect()))
}

/// A network together with how raw node names map onto it.
#[derive(Clone, Debug)]
pub struct LoadedNetwork {
    pub network: RoadNetwork,
    pub report: BuildReport,
    /// Raw node names in first-seen order; indices match `report`.
    pub raw_names: Vec<String>,
}

impl LoadedNetwork {
    pub fn from_parts(network: RoadNetwork, report: BuildReport, raw_names: Vec<String>) -> Self {
        LoadedNetwork { network, report, raw_names }
    }

    /// Location a raw node name stands for: itself when kept, else the
    /// nearest kept node.
    pub fn resolve(&self, name: &str) -> Option<LocationId> {
        if let Some(l) = self.network.find(name) {
            return Some(l);
        }
        let raw = self.raw_names.iter().position(|n| n == name)?;
        self.report.mapping[raw]
    }
}

/// Reads `from_id,to_id,travel_time_seconds` (with header) and, optionally,
/// `id,x,y` coordinates for every node.
pub fn load_network(graph: &Path, coords: Option<&Path>) -> Result<LoadedNetwork, IoError> {
    let text = read(graph)?;
    let mut names: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut id = |name: &str, names: &mut Vec<String>| -> usize {
        *index.entry(name.to_string()).or_insert_with(|| {
            names.push(name.to_string());
            names.len() - 1
        })
    };
    let mut edges = Vec::new();
    for (line, f) in rows(&text) {
        let err = |msg: &str| IoError::Parse { path: graph.into(), line, msg: msg.into() };
        if f.len() != 3 {
            return Err(err("expected from_id,to_id,travel_time_seconds"));
        }
        if f[0].is_empty() || f[1].is_empty() {
            return Err(err("empty node id"));
        }
        let travel_time: u32 = f[2].parse().map_err(|_| err("travel time is not a non-negative integer"))?;
        if travel_time == 0 {
            return Err(err("travel time must be positive"));
        }
        let from = id(f[0], &mut names);
        let to = id(f[1], &mut names);
        edges.push(RawEdge { from, to, travel_time });
    }
    let xy = match coords {
        None => None,
        Some(p) => {
            let text = read(p)?;
            let mut xy = vec![None; names.len()];
            for (line, f) in rows(&text) {
                let err = |msg: &str| IoError::Parse { path: p.into(), line, msg: msg.into() };
                if f.len() != 3 {
                    return Err(err("expected id,x,y"));
                }
                let x: f64 = f[1].parse().map_err(|_| err("bad x"))?;
                let y: f64 = f[2].parse().map_err(|_| err("bad y"))?;
                if let Some(i) = names.iter().position(|n| n == f[0]) {
                    xy[i] = Some((x, y));
                }
            }
            let all: Option<Vec<(f64, f64)>> = xy.into_iter().collect();
            Some(all.ok_or_else(|| IoError::Parse { path: p.into(), line: 0, msg: "missing coordinates for some node".into() })?)
        }
    };
    let (network, report) = RoadNetwork::from_edges(names.clone(), &edges, xy)?;
    for &d in &report.dropped {
        log::warn!("node {} is outside the largest strongly connected component; dropped", names[d]);
    }
    Ok(LoadedNetwork { network, report, raw_names: names })
}

/// Reads `origin,destination,arrival_seconds`. Ids follow row order; names
/// outside the kept component map to their nearest kept node.
pub fn load_trace(path: &Path, net: &LoadedNetwork) -> Result<DemandTrace, IoError> {
    let text = read(path)?;
    parse_trace(&text, path, net)
}

pub fn parse_trace(text: &str, path: &Path, net: &LoadedNetwork) -> Result<DemandTrace, IoError> {
    let mut requests = Vec::new();
    for (row, (line, f)) in rows(text).enumerate() {
        let perr = |msg: &str| IoError::Parse { path: path.into(), line, msg: msg.into() };
        let rerr = |msg: String| IoError::Row { path: path.into(), row, msg };
        if f.len() != 3 {
            return Err(perr("expected origin,destination,arrival_seconds"));
        }
        let arrival: Seconds = f[2].parse().map_err(|_| perr("arrival is not an integer"))?;
        let origin = net.resolve(f[0]).ok_or_else(|| rerr(format!("origin {} cannot be mapped to the network", f[0])))?;
        let destination =
            net.resolve(f[1]).ok_or_else(|| rerr(format!("destination {} cannot be mapped to the network", f[1])))?;
        if origin == destination {
            return Err(rerr("origin and destination map to the same node".into()));
        }
        if arrival < 0 {
            return Err(rerr("negative arrival".into()));
        }
        requests.push(Request { id: RequestId(row as u32), origin, destination, arrival });
    }
    Ok(DemandTrace::new(requests)?)
}

pub fn graph_csv(net: &RoadNetwork) -> String {
    let mut s = String::from("from_id,to_id,travel_time_seconds\n");
    for a in net.locations() {
        for &(b, t) in net.out_edges(a) {
            let _ = writeln!(s, "{},{},{}", net.name(a), net.name(b), t);
        }
    }
    s
}

pub fn coords_csv(net: &RoadNetwork) -> Option<String> {
    let xy = net.coords()?;
    let mut s = String::from("id,x,y\n");
    for (a, &(x, y)) in net.locations().zip(xy) {
        let _ = writeln!(s, "{},{},{}", net.name(a), x, y);
    }
    Some(s)
}

pub fn trace_csv(net: &RoadNetwork, requests: &[Request]) -> String {
    let mut s = String::from("origin,destination,arrival_seconds\n");
    for r in requests {
        let _ = writeln!(s, "{},{},{}", net.name(r.origin), net.name(r.destination), r.arrival);
    }
    s
}

/// `location,zone,center` rows in location order.
pub fn zoning_csv(net: &RoadNetwork, z: &Zoning) -> String {
    let mut s = String::from("location,zone,center\n");
    for (l, q) in z.assignment() {
        let _ = writeln!(s, "{},{},{}", net.name(l), q.0, net.name(z.center(q)));
    }
    s
}

/// Every `*.csv` in `dir`, sorted by file name, loaded as traces.
pub fn load_sample_dir(dir: &Path, net: &LoadedNetwork) -> Result<Vec<DemandTrace>, IoError> {
    let entries = fs::read_dir(dir).map_err(|source| IoError::Read { path: dir.into(), source })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    files.iter().map(|p| load_trace(p, net)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    fn triangle(dir: &Path) -> LoadedNetwork {
        let g = write(dir, "g.csv", "from_id,to_id,travel_time_seconds\na,b,10\nb,c,10\nc,a,10\nz,a,4\n");
        load_network(&g, None).unwrap()
    }

    #[test]
    fn loads_graph_and_maps_dropped_nodes() {
        let dir = tempfile::tempdir().unwrap();
        let net = triangle(dir.path());
        assert_eq!(net.network.len(), 3);
        let a = net.network.find("a").unwrap();
        let c = net.network.find("c").unwrap();
        assert_eq!(net.network.time(a, c), 20);
        assert_eq!(net.network.time(c, a), 10);
        assert_eq!(net.resolve("z"), Some(a));
        assert_eq!(net.resolve("nowhere"), None);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let g = write(dir.path(), "g.csv", "h\na,b,10\nb,a,x\n");
        match load_network(&g, None).unwrap_err() {
            IoError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        let empty = write(dir.path(), "e.csv", "from_id,to_id,travel_time_seconds\n");
        assert!(matches!(load_network(&empty, None).unwrap_err(), IoError::Network(NetworkError::EmptyComponent)));
    }

    #[test]
    fn traces() {
        let dir = tempfile::tempdir().unwrap();
        let net = triangle(dir.path());
        let empty = write(dir.path(), "t0.csv", "origin,destination,arrival_seconds\n");
        assert!(load_trace(&empty, &net).unwrap().is_empty());

        let t = write(dir.path(), "t1.csv", "origin,destination,arrival_seconds\na,b,50\nb,c,10\nz,c,30\n");
        let trace = load_trace(&t, &net).unwrap();
        let got: Vec<(u32, Seconds)> = trace.requests().iter().map(|r| (r.id.0, r.arrival)).collect();
        assert_eq!(got, vec![(1, 10), (2, 30), (0, 50)]);

        let bad = write(dir.path(), "t2.csv", "origin,destination,arrival_seconds\na,b,5\nq,b,6\n");
        match load_trace(&bad, &net).unwrap_err() {
            IoError::Row { row, .. } => assert_eq!(row, 1),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn hundred_rows() {
        let dir = tempfile::tempdir().unwrap();
        let net = triangle(dir.path());
        let mut body = String::from("origin,destination,arrival_seconds\n");
        for i in 0..100 {
            let (o, d) = if i % 2 == 0 { ("a", "c") } else { ("c", "b") };
            body.push_str(&format!("{o},{d},{}\n", 1000 - i * 7 % 300));
        }
        let t = write(dir.path(), "t.csv", &body);
        let trace = load_trace(&t, &net).unwrap();
        assert_eq!(trace.len(), 100);
        let mut ids: Vec<u32> = trace.requests().iter().map(|r| r.id.0).collect();
        ids.sort();
        assert_eq!(ids, (0..100).collect::<Vec<_>>());
        assert_eq!(load_trace(&t, &net).unwrap(), trace);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let net = triangle(dir.path());
        let g2 = write(dir.path(), "g2.csv", &graph_csv(&net.network));
        let again = load_network(&g2, None).unwrap();
        for a in net.network.locations() {
            for b in net.network.locations() {
                let (na, nb) = (net.network.name(a), net.network.name(b));
                let (a2, b2) = (again.resolve(na).unwrap(), again.resolve(nb).unwrap());
                assert_eq!(net.network.time(a, b), again.network.time(a2, b2));
            }
        }
    }
}
