//! Two-stage assignment: today's batch plus the expected number of future
//! requests the chosen vehicle paths leave the fleet able to serve.
//!
//! Future demand comes from historical samples grouped by origin zone,
//! destination zone and epoch. A vehicle taking path `m` is assumed free
//! again at the zone and epoch where `m` ends; the second stage is then a
//! weighted bipartite matching between those supply types and the grouped
//! demand, per sample.

mod benders;
mod model;

pub use benders::{benders_solve, slave_value, slave_value_lp, BendersLog, Cut, SlaveResult};
pub use model::{build_zacfuture, solve_monolithic, FutureModel, FutureSolution};

use crate::network::{Request, RoadNetwork};
use crate::rpv::{PathNode, RpvGraph};
use crate::zoning::{ZoneId, Zoning};
use crate::Seconds;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Where and when a vehicle becomes free: (zone, epoch).
pub type SupplyType = (ZoneId, i64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Element {
    pub origin: ZoneId,
    pub destination: ZoneId,
    pub epoch: i64,
    pub count: u32,
}

/// A share of an element small enough for one vehicle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Subelement {
    pub element: usize,
    pub index: u32,
    /// Requests it stands for when a vehicle can reach it.
    pub weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sample {
    pub elements: Vec<Element>,
    pub subelements: Vec<Subelement>,
}

impl Sample {
    pub fn total_weight(&self) -> f64 {
        self.subelements.iter().map(|s| s.weight).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FutureSampleSet {
    pub current_epoch: i64,
    /// Epochs covered after the current one.
    pub lookahead_epochs: i64,
    pub delta: Seconds,
    pub tau: Seconds,
    pub kappa: u32,
    pub samples: Vec<Sample>,
    /// Per origin zone: zones within `tau` of it, with the centre-to-centre time.
    pub near: BTreeMap<ZoneId, Vec<(ZoneId, u32)>>,
}

/// Weights of the subelements of an element with `count` requests:
/// full vehicles first, then the remainder.
pub fn subelement_weights(count: u32, kappa: u32) -> Vec<f64> {
    let kappa = kappa.max(1);
    let full = count / kappa;
    let mut w: Vec<f64> = (0..full).map(|_| kappa as f64).collect();
    if count % kappa != 0 {
        w.push((count % kappa) as f64);
    }
    w
}

/// Groups each raw sample's requests arriving in the lookahead window by
/// origin zone, destination zone and epoch.
#[allow(clippy::too_many_arguments)]
pub fn abstract_samples(
    raw: &[Vec<Request>],
    zoning: &Zoning,
    network: &RoadNetwork,
    current_epoch: i64,
    rho: Seconds,
    delta: Seconds,
    kappa: u32,
    tau: Seconds,
) -> FutureSampleSet {
    let lookahead_epochs = rho / delta;
    let t = current_epoch * delta;
    let mut samples = Vec::with_capacity(raw.len());
    let mut origins: BTreeMap<ZoneId, ()> = BTreeMap::new();
    for day in raw {
        let mut counts: BTreeMap<(ZoneId, ZoneId, i64), u32> = BTreeMap::new();
        for r in day {
            if r.arrival <= t || r.arrival > t + lookahead_epochs * delta {
                continue;
            }
            let e = (r.arrival + delta - 1) / delta;
            *counts.entry((zoning.zone(r.origin), zoning.zone(r.destination), e)).or_default() += 1;
        }
        let mut s = Sample::default();
        for ((o, d, e), count) in counts {
            origins.insert(o, ());
            let k = s.elements.len();
            s.elements.push(Element { origin: o, destination: d, epoch: e, count });
            for (r, w) in subelement_weights(count, kappa).into_iter().enumerate() {
                s.subelements.push(Subelement { element: k, index: r as u32, weight: w });
            }
        }
        samples.push(s);
    }
    let mut near = BTreeMap::new();
    for o in origins.into_keys() {
        let list: Vec<(ZoneId, u32)> = zoning
            .zones()
            .map(|z| (z, zoning.time(network, z, o)))
            .filter(|&(_, tt)| tt as Seconds <= tau)
            .collect();
        near.insert(o, list);
    }
    FutureSampleSet { current_epoch, lookahead_epochs, delta, tau, kappa: kappa.max(1), samples, near }
}

impl FutureSampleSet {
    /// A vehicle of type `ty` can reach the element's origin within the wait
    /// limit (counting the epochs it frees up after the element appears).
    pub fn reaches(&self, ty: SupplyType, element: &Element) -> bool {
        let late = ((ty.1 - element.epoch) * self.delta).max(0);
        self.near
            .get(&element.origin)
            .and_then(|l| l.iter().find(|&&(z, _)| z == ty.0))
            .is_some_and(|&(_, tt)| late + tt as Seconds <= self.tau)
    }

    /// Weight of assigning type `ty` to subelement `s` of sample `k`.
    pub fn weight(&self, k: usize, ty: SupplyType, s: usize) -> f64 {
        let sample = &self.samples[k];
        let sub = &sample.subelements[s];
        if self.reaches(ty, &sample.elements[sub.element]) {
            sub.weight
        } else {
            0.0
        }
    }
}

/// Zone (at the sample zoning) and epoch where each path ends; `None` when
/// it ends past the lookahead.
pub fn path_types(graph: &RpvGraph, path_zonings: &[Zoning], zs: &Zoning, samples: &FutureSampleSet) -> Vec<Option<SupplyType>> {
    graph
        .paths
        .iter()
        .map(|p| {
            let last = match *p.nodes.last().unwrap() {
                PathNode::Location(l) => l,
                PathNode::Zone(z) => path_zonings[p.zoning].center(z),
            };
            let e = ((p.end_time() + samples.delta - 1) / samples.delta).max(samples.current_epoch + 1);
            (e <= samples.current_epoch + samples.lookahead_epochs).then(|| (zs.zone(last), e))
        })
        .collect()
}

/// Graph, samples and path types bundled for the solvers.
pub struct FutureProblem<'a> {
    pub graph: &'a RpvGraph,
    pub samples: &'a FutureSampleSet,
    pub path_type: Vec<Option<SupplyType>>,
}

impl FutureProblem<'_> {
    /// Supply types some path ends in, sorted.
    pub fn types(&self) -> Vec<SupplyType> {
        let mut t: Vec<SupplyType> = self.path_type.iter().flatten().copied().collect();
        t.sort();
        t.dedup();
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn weights_fill_vehicles_first() {
        assert_eq!(subelement_weights(7, 4), vec![4.0, 3.0]);
        assert_eq!(subelement_weights(4, 4), vec![4.0]);
        assert_eq!(subelement_weights(0, 4), Vec::<f64>::new());
    }
}
