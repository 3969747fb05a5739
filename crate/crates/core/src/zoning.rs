//! Partitions of the road network into zones.
//!
//! A zone's size is the travel-time scale it is built for. Size 0 always
//! gives one zone per location, whatever the method.

use crate::network::{LocationId, RoadNetwork};
use crate::Seconds;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZoneId(pub u32);

impl ZoneId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ZoningMethod {
    /// Square grid cells over node coordinates.
    Grid,
    /// Agglomerative clustering, complete linkage.
    HacMax,
    /// Agglomerative clustering, mean linkage.
    HacAvg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZoningError {
    NoCoordinates,
    NegativeSize(Seconds),
    UnknownLocation(LocationId),
}

impl fmt::Display for ZoningError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZoningError::NoCoordinates => write!(f, "grid zoning needs node coordinates"),
            ZoningError::NegativeSize(s) => write!(f, "zone size must be non-negative, got {s}"),
            ZoningError::UnknownLocation(l) => write!(f, "location {l} is not in the network"),
        }
    }
}

impl core::error::Error for ZoningError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zoning {
    size: Seconds,
    method: ZoningMethod,
    zone_of: Vec<ZoneId>,
    members: Vec<Vec<LocationId>>,
    centers: Vec<LocationId>,
}

impl Zoning {
    /// One zone per location.
    pub fn singletons(network: &RoadNetwork, method: ZoningMethod) -> Zoning {
        let groups = network.locations().map(|l| vec![l]).collect();
        Zoning::from_groups(network, 0, method, groups)
    }

    /// Builds a zoning from disjoint member lists covering every location.
    /// Zones are numbered by their smallest member.
    fn from_groups(network: &RoadNetwork, size: Seconds, method: ZoningMethod, mut groups: Vec<Vec<LocationId>>) -> Zoning {
        for g in groups.iter_mut() {
            g.sort();
        }
        groups.retain(|g| !g.is_empty());
        groups.sort_by_key(|g| g[0]);
        let mut zone_of = vec![ZoneId(0); network.len()];
        let mut centers = Vec::with_capacity(groups.len());
        for (z, g) in groups.iter().enumerate() {
            for &l in g {
                zone_of[l.index()] = ZoneId(z as u32);
            }
            let centre = g
                .iter()
                .copied()
                .min_by_key(|&c| (g.iter().map(|&m| sym_time(network, c, m)).max().unwrap_or(0), c))
                .expect("non-empty zone");
            centers.push(centre);
        }
        Zoning { size, method, zone_of, members: groups, centers }
    }

    pub fn size(&self) -> Seconds {
        self.size
    }

    pub fn method(&self) -> ZoningMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn zone_of(&self, loc: LocationId) -> Result<ZoneId, ZoningError> {
        self.zone_of.get(loc.index()).copied().ok_or(ZoningError::UnknownLocation(loc))
    }

    /// Like [`Zoning::zone_of`] for locations known to be in the network.
    pub fn zone(&self, loc: LocationId) -> ZoneId {
        self.zone_of[loc.index()]
    }

    pub fn members(&self, zone: ZoneId) -> &[LocationId] {
        &self.members[zone.index()]
    }

    /// Member with the smallest worst-case travel time to the other members.
    pub fn center(&self, zone: ZoneId) -> LocationId {
        self.centers[zone.index()]
    }

    pub fn zones(&self) -> impl Iterator<Item = ZoneId> + '_ {
        (0..self.members.len() as u32).map(ZoneId)
    }

    /// Zone-to-zone travel time estimate: between the two centres.
    pub fn time(&self, network: &RoadNetwork, from: ZoneId, to: ZoneId) -> u32 {
        network.time(self.center(from), self.center(to))
    }

    /// Largest travel time between two members of one zone.
    pub fn max_internal_time(&self, network: &RoadNetwork) -> u32 {
        self.members
            .iter()
            .flat_map(|g| g.iter().flat_map(move |&a| g.iter().map(move |&b| network.time(a, b))))
            .max()
            .unwrap_or(0)
    }

    /// `(location, zone)` pairs in location order.
    pub fn assignment(&self) -> impl Iterator<Item = (LocationId, ZoneId)> + '_ {
        self.zone_of.iter().enumerate().map(|(l, &z)| (LocationId(l as u32), z))
    }
}

fn sym_time(network: &RoadNetwork, a: LocationId, b: LocationId) -> u32 {
    network.time(a, b).max(network.time(b, a))
}

/// Grid zoning: node coordinates are cut into square cells of side `cell`.
pub fn cluster_gbc(network: &RoadNetwork, cell: Seconds) -> Result<Zoning, ZoningError> {
    if cell < 0 {
        return Err(ZoningError::NegativeSize(cell));
    }
    let coords = network.coords().ok_or(ZoningError::NoCoordinates)?;
    if cell == 0 {
        return Ok(Zoning::singletons(network, ZoningMethod::Grid));
    }
    let side = cell as f64;
    let mut cells: BTreeMap<(i64, i64), Vec<LocationId>> = BTreeMap::new();
    for (l, &(x, y)) in network.locations().zip(coords) {
        let key = (libm::floor(x / side) as i64, libm::floor(y / side) as i64);
        cells.entry(key).or_default().push(l);
    }
    Ok(Zoning::from_groups(network, cell, ZoningMethod::Grid, cells.into_values().collect()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linkage {
    /// Largest pairwise time.
    Complete,
    /// Mean pairwise time.
    Mean,
}

/// Linkage value kept as an exact fraction `sum / pairs`.
#[derive(Clone, Copy, Debug)]
struct Link {
    sum: u64,
    pairs: u64,
}

impl Link {
    fn cmp(&self, other: &Link) -> Ordering {
        (self.sum as u128 * other.pairs as u128).cmp(&(other.sum as u128 * self.pairs as u128))
    }

    fn within(&self, threshold: u64) -> bool {
        self.sum as u128 <= threshold as u128 * self.pairs as u128
    }
}

/// Agglomerative clustering: repeatedly merge the closest pair of clusters
/// while their linkage is at most `threshold`. Ties go to the pair whose
/// smallest members are lexicographically smallest.
pub fn cluster_hac(network: &RoadNetwork, linkage: Linkage, threshold: Seconds) -> Result<Zoning, ZoningError> {
    if threshold < 0 {
        return Err(ZoningError::NegativeSize(threshold));
    }
    let method = match linkage {
        Linkage::Complete => ZoningMethod::HacMax,
        Linkage::Mean => ZoningMethod::HacAvg,
    };
    let n = network.len();
    // cluster slots are indexed by their smallest member
    let mut alive = vec![true; n];
    let mut size = vec![1u64; n];
    let mut members: Vec<Vec<LocationId>> = network.locations().map(|l| vec![l]).collect();
    let mut link = vec![Link { sum: 0, pairs: 1 }; n * n];
    for a in 0..n {
        for b in 0..n {
            let t = sym_time(network, LocationId(a as u32), LocationId(b as u32)) as u64;
            link[a * n + b] = Link { sum: t, pairs: 1 };
        }
    }
    // best partner with a larger slot index, per slot
    let best_of = |link: &[Link], alive: &[bool], a: usize| -> Option<usize> {
        let mut best: Option<usize> = None;
        for b in a + 1..n {
            if !alive[b] {
                continue;
            }
            match best {
                None => best = Some(b),
                Some(c) if link[a * n + b].cmp(&link[a * n + c]) == Ordering::Less => best = Some(b),
                _ => {}
            }
        }
        best
    };
    let mut best: Vec<Option<usize>> = (0..n).map(|a| best_of(&link, &alive, a)).collect();
    let limit = threshold as u64;
    loop {
        let mut pick: Option<(usize, usize)> = None;
        for a in 0..n {
            if !alive[a] {
                continue;
            }
            if let Some(b) = best[a] {
                match pick {
                    None => pick = Some((a, b)),
                    Some((pa, pb)) if link[a * n + b].cmp(&link[pa * n + pb]) == Ordering::Less => pick = Some((a, b)),
                    _ => {}
                }
            }
        }
        let Some((a, b)) = pick else { break };
        if !link[a * n + b].within(limit) {
            break;
        }
        // merge b into a (a < b keeps the smallest member)
        alive[b] = false;
        let moved = core::mem::take(&mut members[b]);
        members[a].extend(moved);
        for c in 0..n {
            if !alive[c] || c == a {
                continue;
            }
            let (la, lb) = (link[a * n + c], link[b * n + c]);
            let merged = match linkage {
                Linkage::Complete => {
                    if la.sum >= lb.sum {
                        la
                    } else {
                        lb
                    }
                }
                Linkage::Mean => Link { sum: la.sum + lb.sum, pairs: (size[a] + size[b]) * size[c] },
            };
            link[a * n + c] = merged;
            link[c * n + a] = merged;
        }
        size[a] += size[b];
        for c in 0..n {
            if !alive[c] {
                continue;
            }
            let stale = c == a
                || matches!(best[c], Some(x) if x == a || x == b)
                || (c < a && match best[c] {
                    Some(x) => link[c * n + a].cmp(&link[c * n + x]) != Ordering::Greater,
                    None => true,
                });
            if stale {
                best[c] = best_of(&link, &alive, c);
            }
        }
    }
    let groups = (0..n).filter(|&a| alive[a]).map(|a| core::mem::take(&mut members[a])).collect();
    Ok(Zoning::from_groups(network, threshold, method, groups))
}

/// Dispatches on `method`; size 0 always yields singletons.
pub fn cluster(network: &RoadNetwork, method: ZoningMethod, size: Seconds) -> Result<Zoning, ZoningError> {
    if size < 0 {
        return Err(ZoningError::NegativeSize(size));
    }
    match method {
        ZoningMethod::Grid => cluster_gbc(network, size),
        _ if size == 0 => Ok(Zoning::singletons(network, method)),
        ZoningMethod::HacMax => cluster_hac(network, Linkage::Complete, size),
        ZoningMethod::HacAvg => cluster_hac(network, Linkage::Mean, size),
    }
}
