use super::{locate_drop, CandidateInfo, CandidateKey, PathNode, RpvConfig, Window};
use crate::network::{LocationId, RequestId, RoadNetwork};
use crate::par::par_map;
use crate::zoning::{ZoneId, Zoning};
use crate::Seconds;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

/// One way of finishing a candidate's prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    pub key: CandidateKey,
    /// Index of the zoning the suffix uses.
    pub zoning: usize,
    /// Zones to visit after the prefix, with times relative to `t`.
    pub suffix: Vec<(ZoneId, Seconds)>,
    /// Requests (new and committed) whose deadlines the path meets.
    pub served: Vec<RequestId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CompletionOutput {
    pub completions: Vec<Completion>,
    /// Candidates whose search hit the node budget.
    pub truncated: usize,
    pub explored: u64,
}

impl Completion {
    /// Node sequence and relative times of the whole path.
    pub fn layout(&self, info: &CandidateInfo) -> (Vec<PathNode>, Vec<Seconds>) {
        let mut nodes: Vec<PathNode> = info.prefix.iter().map(|&(l, _)| PathNode::Location(l)).collect();
        let mut times: Vec<Seconds> = info.prefix.iter().map(|&(_, t)| t).collect();
        for &(z, at) in &self.suffix {
            nodes.push(PathNode::Zone(z));
            times.push(at);
        }
        (nodes, times)
    }

    pub fn finish(&self, info: &CandidateInfo) -> Seconds {
        self.suffix.last().map_or(info.prefix.last().unwrap().1, |x| x.1)
    }
}

/// Smallest zoning that brings the destinations down to `max` zones, or
/// the coarsest one.
pub fn pick_zoning(dropoffs: &BTreeMap<LocationId, Window>, zonings: &[Zoning], max: usize) -> usize {
    for (i, z) in zonings.iter().enumerate() {
        let distinct: BTreeSet<ZoneId> = dropoffs.keys().map(|&d| z.zone(d)).collect();
        if distinct.len() <= max {
            return i;
        }
    }
    zonings.len() - 1
}

struct Search<'a> {
    network: &'a RoadNetwork,
    zoning: &'a Zoning,
    targets: Vec<(ZoneId, Window)>,
    budget: usize,
    explored: usize,
    truncated: bool,
    leaves: Vec<Vec<(ZoneId, Seconds)>>,
}

impl Search<'_> {
    fn run(&mut self, from: LocationId, at: Seconds, used: &mut Vec<bool>, seq: &mut Vec<(ZoneId, Seconds)>) {
        let mut extended = false;
        for k in 0..self.targets.len() {
            if used[k] {
                continue;
            }
            if self.explored >= self.budget {
                self.truncated = true;
                break;
            }
            let (z, w) = self.targets[k];
            let centre = self.zoning.center(z);
            let arrive = at + self.network.time(from, centre) as Seconds;
            if arrive + self.zoning.size() > w.ub {
                continue;
            }
            self.explored += 1;
            extended = true;
            used[k] = true;
            seq.push((z, arrive));
            self.run(centre, arrive, used, seq);
            seq.pop();
            used[k] = false;
        }
        if !extended {
            self.leaves.push(seq.clone());
        }
    }
}

fn complete_one(
    key: CandidateKey,
    info: &CandidateInfo,
    zonings: &[Zoning],
    network: &RoadNetwork,
    cfg: &RpvConfig,
) -> (Vec<Completion>, bool, u64) {
    let zi = if info.dropoffs.is_empty() { 0 } else { pick_zoning(&info.dropoffs, zonings, cfg.max_destinations) };
    let zoning = &zonings[zi];
    let mut abstracted: BTreeMap<ZoneId, Window> = BTreeMap::new();
    for (&d, &w) in &info.dropoffs {
        abstracted.entry(zoning.zone(d)).and_modify(|x| x.merge(w)).or_insert(w);
    }
    let mut targets: Vec<(ZoneId, Window)> = abstracted.into_iter().collect();
    targets.sort_by_key(|&(z, w)| (w.lb, z));
    let (end, at) = *info.prefix.last().expect("prefix holds the start");
    let mut search = Search {
        network,
        zoning,
        targets,
        budget: cfg.node_budget,
        explored: 0,
        truncated: false,
        leaves: Vec::new(),
    };
    let mut used = vec![false; search.targets.len()];
    search.run(end, at, &mut used, &mut Vec::new());

    let mut out = Vec::new();
    for suffix in search.leaves {
        let mut c = Completion { key, zoning: zi, suffix, served: Vec::new() };
        let (nodes, times) = c.layout(info);
        let mut complete = true;
        let mut any_new = false;
        for r in &info.requests {
            if locate_drop(&nodes, &times, zoning, r.pickup, r.destination, r.window.ub).is_some() {
                c.served.push(r.request);
                any_new |= !r.committed;
            } else if r.committed {
                complete = false;
                break;
            }
        }
        if complete && any_new {
            c.served.sort();
            out.push(c);
        }
    }
    (out, search.truncated, search.explored as u64)
}

fn is_subset(a: &[RequestId], b: &[RequestId]) -> bool {
    let mut it = b.iter();
    a.iter().all(|x| it.by_ref().any(|y| y == x))
}

/// Drops completions whose served set is contained in another completion's
/// from the same anchor; among equal sets keeps the earliest finish, then
/// the smallest node sequence.
pub fn filter_redundant(completions: Vec<Completion>, candidates: &BTreeMap<CandidateKey, CandidateInfo>) -> Vec<Completion> {
    let mut by_anchor: BTreeMap<usize, Vec<Completion>> = BTreeMap::new();
    for c in completions {
        by_anchor.entry(c.key.0).or_default().push(c);
    }
    let mut out = Vec::new();
    for (_, group) in by_anchor {
        let rank: Vec<(Seconds, Vec<PathNode>)> = group
            .iter()
            .map(|c| {
                let info = &candidates[&c.key];
                (c.finish(info), c.layout(info).0)
            })
            .collect();
        for (i, c) in group.iter().enumerate() {
            let dominated = group.iter().enumerate().any(|(j, o)| {
                if i == j || !is_subset(&c.served, &o.served) {
                    return false;
                }
                o.served.len() > c.served.len() || rank[j] < rank[i]
            });
            if !dominated {
                out.push(c.clone());
            }
        }
    }
    out.sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.suffix.cmp(&b.suffix)));
    out
}

/// Completes every candidate over zones and prunes redundant completions.
pub fn complete_paths(
    candidates: &BTreeMap<CandidateKey, CandidateInfo>,
    zonings: &[Zoning],
    network: &RoadNetwork,
    cfg: &RpvConfig,
) -> CompletionOutput {
    let items: Vec<(&CandidateKey, &CandidateInfo)> = candidates.iter().collect();
    let parts = par_map(&items, |&(k, info)| complete_one(*k, info, zonings, network, cfg));
    let mut all = Vec::new();
    let mut truncated = 0;
    let mut explored = 0;
    for (c, t, e) in parts {
        all.extend(c);
        truncated += t as usize;
        explored += e;
    }
    CompletionOutput { completions: filter_redundant(all, candidates), truncated, explored }
}
