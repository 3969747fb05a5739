//! Grid city with a downtown square ringed by suburbs, one train station per
//! suburb, and a first/last-mile demand pattern.
//!
//! With the defaults the city has 192 nodes and 640 directed road segments:
//! an 8×8 downtown, eight 4×4 suburbs, and two two-way links per suburb.

use super::{BuildReport, DemandTrace, LocationId, RawEdge, Request, RequestId, RoadNetwork};
use crate::Seconds;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub suburbs: usize,
    /// Side of the downtown grid, in nodes.
    pub downtown_size: usize,
    /// Side of each suburb grid, in nodes.
    pub suburb_size: usize,
    /// Travel time of one grid block, seconds.
    pub block_time: u32,
    /// Empty space between downtown and a suburb, seconds of driving.
    pub suburb_gap: u32,
    pub horizon: Seconds,
    /// Epoch length used to batch uniform requests.
    pub delta: Seconds,
    /// Mean number of uniform origin/destination requests per epoch.
    pub uniform_per_epoch: f64,
    /// Seconds between train arrivals.
    pub train_period: Seconds,
    /// First/last-mile requests generated at each station per train.
    pub station_batch: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            suburbs: 8,
            downtown_size: 8,
            suburb_size: 4,
            block_time: 30,
            suburb_gap: 90,
            horizon: 3600,
            delta: 60,
            uniform_per_epoch: 8.0,
            train_period: 180,
            station_batch: 6,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntheticError {
    NoSuburbs,
    EmptyGrid,
    NonPositivePeriod,
}

impl fmt::Display for SyntheticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntheticError::NoSuburbs => write!(f, "synthetic city needs at least one suburb"),
            SyntheticError::EmptyGrid => write!(f, "downtown and suburb grids need at least one node"),
            SyntheticError::NonPositivePeriod => write!(f, "epoch length and train period must be positive"),
        }
    }
}

impl core::error::Error for SyntheticError {}

#[derive(Clone, Debug)]
pub struct SyntheticCity {
    pub network: RoadNetwork,
    pub stations: Vec<LocationId>,
    /// Suburb membership per location (`None` for downtown).
    pub suburb_of: Vec<Option<usize>>,
    pub trace: DemandTrace,
}

struct Layout {
    names: Vec<String>,
    coords: Vec<(f64, f64)>,
    edges: Vec<RawEdge>,
    stations: Vec<usize>,
    suburb_of: Vec<Option<usize>>,
}

fn layout(cfg: &SyntheticConfig) -> Layout {
    let d = cfg.downtown_size;
    let s = cfg.suburb_size;
    let block = cfg.block_time as f64;
    let mut names = Vec::new();
    let mut coords = Vec::new();
    let mut edges = Vec::new();
    let mut suburb_of = Vec::new();

    let grid = |names: &mut Vec<String>,
                    coords: &mut Vec<(f64, f64)>,
                    edges: &mut Vec<RawEdge>,
                    suburb_of: &mut Vec<Option<usize>>,
                    side: usize,
                    origin: (f64, f64),
                    prefix: String,
                    suburb: Option<usize>| {
        let base = names.len();
        for r in 0..side {
            for c in 0..side {
                names.push(format!("{prefix}{r}_{c}"));
                coords.push((origin.0 + c as f64 * block, origin.1 + r as f64 * block));
                suburb_of.push(suburb);
            }
        }
        for r in 0..side {
            for c in 0..side {
                let v = base + r * side + c;
                if c + 1 < side {
                    edges.push(RawEdge { from: v, to: v + 1, travel_time: cfg.block_time });
                    edges.push(RawEdge { from: v + 1, to: v, travel_time: cfg.block_time });
                }
                if r + 1 < side {
                    edges.push(RawEdge { from: v, to: v + side, travel_time: cfg.block_time });
                    edges.push(RawEdge { from: v + side, to: v, travel_time: cfg.block_time });
                }
            }
        }
        base
    };

    grid(&mut names, &mut coords, &mut edges, &mut suburb_of, d, (0.0, 0.0), String::from("d"), None);
    let half_down = (d.saturating_sub(1)) as f64 * block / 2.0;
    let half_sub = (s.saturating_sub(1)) as f64 * block / 2.0;
    let centre = (half_down, half_down);
    // suburb centres sit on a ring clear of downtown's corners
    let radius = half_down * core::f64::consts::SQRT_2 + half_sub * core::f64::consts::SQRT_2 + cfg.suburb_gap as f64;
    let mut stations = Vec::new();
    for k in 0..cfg.suburbs {
        let angle = 2.0 * core::f64::consts::PI * k as f64 / cfg.suburbs as f64;
        let sc = (centre.0 + radius * libm::cos(angle), centre.1 + radius * libm::sin(angle));
        let origin = (libm::round(sc.0 - half_sub), libm::round(sc.1 - half_sub));
        let base = grid(&mut names, &mut coords, &mut edges, &mut suburb_of, s, origin, format!("s{k}_"), Some(k));
        stations.push(base + (s / 2) * s + s / 2);

        // two-way links from the two suburb nodes nearest downtown
        let dist = |a: (f64, f64), b: (f64, f64)| libm::sqrt((a.0 - b.0) * (a.0 - b.0) + (a.1 - b.1) * (a.1 - b.1));
        let mut near: Vec<usize> = (base..base + s * s).collect();
        near.sort_by(|&a, &b| dist(coords[a], centre).partial_cmp(&dist(coords[b], centre)).unwrap().then(a.cmp(&b)));
        for &v in near.iter().take(2.min(near.len())) {
            let target = (0..d * d)
                .min_by(|&a, &b| dist(coords[v], coords[a]).partial_cmp(&dist(coords[v], coords[b])).unwrap().then(a.cmp(&b)))
                .expect("downtown is non-empty");
            let t = libm::ceil(dist(coords[v], coords[target])).max(1.0) as u32;
            edges.push(RawEdge { from: v, to: target, travel_time: t });
            edges.push(RawEdge { from: target, to: v, travel_time: t });
        }
    }
    Layout { names, coords, edges, stations, suburb_of }
}

/// Knuth's multiplicative Poisson sampler; fine for the small means used here.
fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let limit = libm::exp(-mean);
    let mut k = 0usize;
    let mut p = 1.0;
    loop {
        p *= rng.gen::<f64>();
        if p <= limit {
            return k;
        }
        k += 1;
    }
}

/// Builds the road network only.
pub fn synthetic_network(cfg: &SyntheticConfig) -> Result<(RoadNetwork, Vec<LocationId>, Vec<Option<usize>>), SyntheticError> {
    if cfg.suburbs == 0 {
        return Err(SyntheticError::NoSuburbs);
    }
    if cfg.downtown_size == 0 || cfg.suburb_size == 0 {
        return Err(SyntheticError::EmptyGrid);
    }
    let lay = layout(cfg);
    let (network, report): (RoadNetwork, BuildReport) =
        RoadNetwork::from_edges(lay.names, &lay.edges, Some(lay.coords)).expect("synthetic layout is valid");
    debug_assert!(report.dropped.is_empty());
    let stations = lay.stations.iter().map(|&i| report.mapping[i].expect("station kept")).collect();
    let mut suburb_of = alloc::vec![None; network.len()];
    for (raw, m) in report.mapping.iter().enumerate() {
        if let Some(id) = m {
            suburb_of[id.index()] = lay.suburb_of[raw];
        }
    }
    Ok((network, stations, suburb_of))
}

/// Demand for one day on an already built city. Different seeds give
/// different days with the same statistical pattern.
pub fn synthetic_demand(
    cfg: &SyntheticConfig,
    network: &RoadNetwork,
    stations: &[LocationId],
    suburb_of: &[Option<usize>],
    seed: u64,
) -> Result<DemandTrace, SyntheticError> {
    if cfg.delta <= 0 || cfg.train_period <= 0 {
        return Err(SyntheticError::NonPositivePeriod);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = network.len() as u32;
    let mut raw: Vec<(Seconds, u32, u32)> = Vec::new();

    let epochs = (cfg.horizon + cfg.delta - 1) / cfg.delta;
    for k in 1..=epochs {
        let lo = (k - 1) * cfg.delta;
        let hi = (k * cfg.delta).min(cfg.horizon);
        for _ in 0..poisson(&mut rng, cfg.uniform_per_epoch) {
            let o = rng.gen_range(0..n);
            let mut dst = rng.gen_range(0..n - 1);
            if dst >= o {
                dst += 1;
            }
            let a = if hi > lo { rng.gen_range(lo + 1..=hi) } else { hi };
            raw.push((a, o, dst));
        }
    }

    let members: Vec<Vec<u32>> = (0..stations.len())
        .map(|k| (0..n).filter(|&v| suburb_of[v as usize] == Some(k)).collect())
        .collect();
    let mut t = cfg.train_period;
    while t <= cfg.horizon {
        for (k, &station) in stations.iter().enumerate() {
            let others: Vec<u32> = members[k].iter().copied().filter(|&v| v != station.0).collect();
            if others.is_empty() {
                continue;
            }
            let outbound = cfg.station_batch.div_ceil(2);
            for i in 0..cfg.station_batch {
                let other = others[rng.gen_range(0..others.len())];
                if i < outbound {
                    raw.push((t, station.0, other));
                } else {
                    raw.push((t, other, station.0));
                }
            }
        }
        t += cfg.train_period;
    }

    raw.sort_by_key(|&(a, _, _)| a);
    let requests = raw
        .into_iter()
        .enumerate()
        .map(|(i, (a, o, d))| Request {
            id: RequestId(i as u32),
            origin: LocationId(o),
            destination: LocationId(d),
            arrival: a,
        })
        .collect();
    Ok(DemandTrace::new(requests).expect("generated requests are valid"))
}

/// Network plus one day of demand drawn with `cfg.seed`.
pub fn generate_synthetic_city(cfg: &SyntheticConfig) -> Result<SyntheticCity, SyntheticError> {
    let (network, stations, suburb_of) = synthetic_network(cfg)?;
    let trace = synthetic_demand(cfg, &network, &stations, &suburb_of, cfg.seed)?;
    Ok(SyntheticCity { network, stations, suburb_of, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_city_shape() {
        let city = generate_synthetic_city(&SyntheticConfig::default()).unwrap();
        assert_eq!(city.network.len(), 192);
        assert_eq!(city.network.edge_count(), 640);
        assert_eq!(city.stations.len(), 8);
        let mut st = city.stations.clone();
        st.dedup();
        assert_eq!(st.len(), 8);
    }

    #[test]
    fn zero_suburbs_rejected() {
        let cfg = SyntheticConfig { suburbs: 0, ..Default::default() };
        assert_eq!(generate_synthetic_city(&cfg).unwrap_err(), SyntheticError::NoSuburbs);
    }

    #[test]
    fn station_batches_on_train_times() {
        let cfg = SyntheticConfig { horizon: 360, uniform_per_epoch: 0.0, ..Default::default() };
        let city = generate_synthetic_city(&cfg).unwrap();
        let mut times: Vec<Seconds> = city.trace.requests().iter().map(|r| r.arrival).collect();
        times.dedup();
        assert_eq!(times, alloc::vec![180, 360]);
        assert_eq!(city.trace.len(), 2 * 8 * cfg.station_batch);
        for r in city.trace.requests() {
            assert!(city.stations.contains(&r.origin) || city.stations.contains(&r.destination));
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = SyntheticConfig { horizon: 600, ..Default::default() };
        let a = generate_synthetic_city(&cfg).unwrap();
        let b = generate_synthetic_city(&cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        let c = generate_synthetic_city(&SyntheticConfig { seed: 2, ..cfg }).unwrap();
        assert_ne!(a.trace, c.trace);
    }
}
