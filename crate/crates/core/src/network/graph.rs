//! Plain graph algorithms on adjacency lists.

use super::LocationId;
use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

/// Largest strongly connected component (iterative Tarjan). Ties go to the
/// component containing the smallest index. Returned indices are sorted.
pub(super) fn largest_scc(out: &[Vec<(usize, u32)>]) -> Vec<usize> {
    let n = out.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0usize;
    let mut best: Vec<usize> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (node, next edge position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < out[v].len() {
                let w = out[v][*pos].0;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    let better = comp.len() > best.len()
                        || (comp.len() == best.len() && !comp.is_empty() && comp[0] < best[0]);
                    if better {
                        best = comp;
                    }
                }
            }
        }
    }
    best
}

/// Single-source Dijkstra returning distances and, for every target, the
/// first hop out of the source. Unreachable targets get `u32::MAX`.
pub(super) fn dijkstra_first_hops(out: &[Vec<(LocationId, u32)>], source: usize) -> (Vec<u32>, Vec<u32>) {
    let n = out.len();
    let mut dist = vec![u32::MAX; n];
    let mut first = vec![u32::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0;
    first[source] = source as u32;
    heap.push(Reverse((0u32, source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, t) in &out[v] {
            let w = w.index();
            let nd = d + t;
            if nd < dist[w] {
                dist[w] = nd;
                first[w] = if v == source { w as u32 } else { first[v] };
                heap.push(Reverse((nd, w)));
            }
        }
    }
    (dist, first)
}

/// Dense all-pairs times and next hops by repeated single-source search.
pub(super) fn all_pairs(out: &[Vec<(LocationId, u32)>]) -> (Vec<u32>, Vec<u32>) {
    let n = out.len();
    let mut times = Vec::with_capacity(n * n);
    let mut hops = Vec::with_capacity(n * n);
    for s in 0..n {
        let (d, f) = dijkstra_first_hops(out, s);
        times.extend_from_slice(&d);
        hops.extend_from_slice(&f);
    }
    (times, hops)
}

/// Nearest kept node from a dropped raw node, by travel time in the raw
/// graph; ties go to the lowest network index.
pub(super) fn nearest_kept(
    raw_out: &[Vec<(usize, u32)>],
    source: usize,
    kept: &[Option<LocationId>],
) -> Option<LocationId> {
    let n = raw_out.len();
    let mut dist = vec![u32::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0;
    heap.push(Reverse((0u32, source)));
    let mut best: Option<(u32, LocationId)> = None;
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        if let Some((bd, _)) = best {
            if d > bd {
                break;
            }
        }
        if let Some(id) = kept[v] {
            best = match best {
                Some((bd, bid)) if bd == d && bid <= id => Some((bd, bid)),
                Some((bd, bid)) if bd < d => Some((bd, bid)),
                _ => Some((d, id)),
            };
            continue;
        }
        for &(w, t) in &raw_out[v] {
            let nd = d + t;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse((nd, w)));
            }
        }
    }
    best.map(|(_, id)| id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_picks_largest() {
        // 0<->1 and 2->3->4->2; node 5 isolated
        let out = vec![
            vec![(1, 1)],
            vec![(0, 1)],
            vec![(3, 1)],
            vec![(4, 1)],
            vec![(2, 1)],
            vec![],
        ];
        assert_eq!(largest_scc(&out), vec![2, 3, 4]);
    }

    #[test]
    fn scc_tie_goes_to_smallest_index() {
        let out = vec![vec![(1, 1)], vec![(0, 1)], vec![(3, 1)], vec![(2, 1)]];
        assert_eq!(largest_scc(&out), vec![0, 1]);
    }
}
