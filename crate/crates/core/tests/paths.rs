mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeSet;
use zac_core::network::{Request, RequestId};
use zac_core::pathstore::{
    enumerate_paths, prune_paths_data_driven, PartialPath, PathIndex, PathStoreError, PruneConfig, DEFAULT_PATH_BUDGET,
};
use zac_core::LocationId;

fn as_set(paths: &[PartialPath]) -> BTreeSet<Vec<LocationId>> {
    paths.iter().map(|p| p.nodes.clone()).collect()
}

#[test]
fn enumeration_matches_naive_dfs() {
    let mut rng = rng(31);
    for case in 0..20 {
        let n = rng.gen_range(5..=50);
        let net = random_network(&mut rng, n, n, 10..=20);
        let tau = rng.gen_range(0..=4) * 10;
        let got = enumerate_paths(&net, tau, DEFAULT_PATH_BUDGET).unwrap();
        let want = naive_paths(&net, tau);
        assert_eq!(got.paths.len(), want.len(), "case {case}: duplicates or misses");
        assert_eq!(as_set(&got.paths), want, "case {case}");
    }
}

#[test]
fn two_node_paths_by_hand() {
    let net = network(2, &[(0, 1, 50), (1, 0, 70)]);
    let got = as_set(&enumerate_paths(&net, 60, DEFAULT_PATH_BUDGET).unwrap().paths);
    let want: BTreeSet<Vec<LocationId>> =
        [vec![LocationId(0)], vec![LocationId(1)], vec![LocationId(0), LocationId(1)]].into_iter().collect();
    assert_eq!(got, want);
}

#[test]
fn ring_count_matches_oracle() {
    let net = network(4, &[(0, 1, 10), (1, 2, 10), (2, 3, 10), (3, 0, 10)]);
    let got = enumerate_paths(&net, 20, DEFAULT_PATH_BUDGET).unwrap();
    assert_eq!(got.paths.len(), naive_paths(&net, 20).len());
    assert_eq!(got.paths.len(), 12);
}

#[test]
fn memory_budget_is_reported() {
    let net = grid(4, 4, 10);
    assert_eq!(enumerate_paths(&net, 60, 100).unwrap_err(), PathStoreError::MemoryBudget { limit: 100 });
}

#[test]
fn index_keys_for_single_path() {
    let path = PartialPath { nodes: vec![LocationId(0), LocationId(1)], offsets: vec![0, 50] };
    let index = PathIndex::build(vec![path], 10);
    let keys: Vec<(LocationId, i64)> = index.visit_keys().collect();
    assert_eq!(keys, vec![(LocationId(0), 0), (LocationId(1), 5)]);
    assert!(PathIndex::build(Vec::new(), 10).is_empty());
}

#[test]
fn index_round_trip_and_linear_scan() {
    let mut rng = rng(32);
    let net = random_network(&mut rng, 40, 60, 5..=25);
    let all = enumerate_paths(&net, 60, DEFAULT_PATH_BUDGET).unwrap().paths;
    let picked: Vec<PartialPath> = (0..1000).map(|_| all[rng.gen_range(0..all.len())].clone()).collect();
    let index = PathIndex::build(picked.clone(), 10);
    for (i, p) in picked.iter().enumerate() {
        for (&n, &off) in p.nodes.iter().zip(&p.offsets) {
            assert!(index.get_paths_from_index(n, off, off).iter().any(|id| id.index() == i));
        }
        assert!(index.get_paths_from_index(p.start(), 0, 60).iter().any(|id| id.index() == i));
    }
    for _ in 0..500 {
        let loc = LocationId(rng.gen_range(0..net.len() as u32));
        let lo = rng.gen_range(-20..80);
        let hi = lo + rng.gen_range(-5..40);
        let scan: Vec<usize> = picked
            .iter()
            .enumerate()
            .filter(|(_, p)| p.offset_of(loc).is_some_and(|o| lo <= o && o <= hi))
            .map(|(i, _)| i)
            .collect();
        let got: Vec<usize> = index.get_paths_from_index(loc, lo, hi).iter().map(|id| id.index()).collect();
        assert_eq!(got, scan);
    }
}

fn history(net_len: u32, rng: &mut rand_chacha::ChaCha8Rng, corridor: &[u32]) -> Vec<Request> {
    (0..200)
        .map(|i| {
            let o = if corridor.is_empty() { rng.gen_range(0..net_len) } else { corridor[rng.gen_range(0..corridor.len())] };
            let d = (o + 1) % net_len;
            Request { id: RequestId(i), origin: LocationId(o), destination: LocationId(d), arrival: i as i64 * 18 }
        })
        .collect()
}

#[test]
fn zero_threshold_keeps_full_enumeration() {
    let mut rng = rng(33);
    let net = grid(4, 4, 30);
    let cfg = PruneConfig { segments: vec![60], thresholds: vec![0.0], history: history(16, &mut rng, &[]) };
    let out = prune_paths_data_driven(&net, &cfg, DEFAULT_PATH_BUDGET).unwrap();
    let full = as_set(&enumerate_paths(&net, 60, DEFAULT_PATH_BUDGET).unwrap().paths);
    assert!(full.is_subset(&as_set(&out.paths)));

    let two = PruneConfig { segments: vec![30, 30], thresholds: vec![0.0, 0.0], history: cfg.history.clone() };
    let out = prune_paths_data_driven(&net, &two, DEFAULT_PATH_BUDGET).unwrap();
    let chained: BTreeSet<_> = full.into_iter().filter(|p| p.len() == 3).collect();
    assert!(chained.is_subset(&as_set(&out.paths)));
}

#[test]
fn infinite_threshold_leaves_shortest_paths() {
    let mut rng = rng(34);
    let net = grid(4, 4, 30);
    let cfg = PruneConfig { segments: vec![30, 30], thresholds: vec![f64::INFINITY; 2], history: history(16, &mut rng, &[]) };
    let out = prune_paths_data_driven(&net, &cfg, DEFAULT_PATH_BUDGET).unwrap();
    assert!(out.fallback_only);
    assert!(out.fallback.iter().all(|&f| f));
    for p in &out.paths {
        for (&n, &off) in p.nodes.iter().zip(&p.offsets) {
            assert_eq!(off, net.time(p.start(), n) as i64);
        }
    }
    for a in net.locations() {
        for b in net.locations() {
            if net.time(a, b) <= 60 {
                assert!(out.paths.iter().any(|p| p.start() == a && p.nodes.contains(&b)));
            }
        }
    }
}

#[test]
fn corridor_history_keeps_corridor_paths() {
    let mut rng = rng(35);
    let net = grid(5, 5, 30);
    let corridor = [10, 11, 12, 13, 14];
    let cfg = PruneConfig { segments: vec![30, 30], thresholds: vec![1.0, 1.0], history: history(25, &mut rng, &corridor) };
    let out = prune_paths_data_driven(&net, &cfg, DEFAULT_PATH_BUDGET).unwrap();
    assert!(!out.fallback_only);
    for (p, &fb) in out.paths.iter().zip(&out.fallback) {
        if !fb {
            assert!(p.nodes.iter().any(|n| corridor.contains(&n.0)));
        }
    }
}

#[test]
fn mismatched_segments_rejected() {
    let net = grid(2, 2, 30);
    let cfg = PruneConfig { segments: vec![30, 30], thresholds: vec![0.0], history: Vec::new() };
    assert_eq!(prune_paths_data_driven(&net, &cfg, 100).unwrap_err(), PathStoreError::SegmentMismatch);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn explored_nodes_within_branching_bound(seed in 0u64..10_000, n in 3usize..25, tau in 0i64..60) {
        let mut rng = rng(seed);
        let net = random_network(&mut rng, n, n, 10..=20);
        let e = enumerate_paths(&net, tau, DEFAULT_PATH_BUDGET).unwrap();
        let b = net.max_out_degree().max(2) as f64;
        let k = e.max_hops as i32;
        let bound = net.len() as f64 * (b.powi(k + 1) - 1.0) / (b - 1.0);
        prop_assert!(e.explored as f64 <= bound);
        for p in &e.paths {
            prop_assert!(*p.offsets.last().unwrap() <= tau);
            let distinct: BTreeSet<_> = p.nodes.iter().collect();
            prop_assert_eq!(distinct.len(), p.nodes.len());
            for w in 0..p.nodes.len() - 1 {
                prop_assert_eq!(Some((p.offsets[w + 1] - p.offsets[w]) as u32), net.edge_time(p.nodes[w], p.nodes[w + 1]));
            }
        }
    }
}
