use super::{PartialPath, PathId};
use crate::network::LocationId;
use crate::Seconds;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Paths keyed by start location and by every visited (location, offset
/// bucket). Owns the paths.
#[derive(Clone, Debug)]
pub struct PathIndex {
    paths: Vec<PartialPath>,
    bucket_width: Seconds,
    by_start: BTreeMap<LocationId, Vec<PathId>>,
    by_visit: BTreeMap<(LocationId, Seconds), Vec<PathId>>,
}

pub const DEFAULT_BUCKET_WIDTH: Seconds = 10;

impl PathIndex {
    pub fn build(paths: Vec<PartialPath>, bucket_width: Seconds) -> PathIndex {
        let bucket_width = bucket_width.max(1);
        let mut by_start: BTreeMap<LocationId, Vec<PathId>> = BTreeMap::new();
        let mut by_visit: BTreeMap<(LocationId, Seconds), Vec<PathId>> = BTreeMap::new();
        for (i, p) in paths.iter().enumerate() {
            let id = PathId(i as u32);
            by_start.entry(p.start()).or_default().push(id);
            for (&n, &off) in p.nodes.iter().zip(&p.offsets) {
                by_visit.entry((n, off.div_euclid(bucket_width))).or_default().push(id);
            }
        }
        PathIndex { paths, bucket_width, by_start, by_visit }
    }

    pub fn paths(&self) -> &[PartialPath] {
        &self.paths
    }

    pub fn path(&self, id: PathId) -> &PartialPath {
        &self.paths[id.index()]
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn bucket_width(&self) -> Seconds {
        self.bucket_width
    }

    /// Visit keys, for inspection.
    pub fn visit_keys(&self) -> impl Iterator<Item = (LocationId, Seconds)> + '_ {
        self.by_visit.keys().copied()
    }

    /// Paths starting at `loc`, in id order.
    pub fn starting_at(&self, loc: LocationId) -> &[PathId] {
        self.by_start.get(&loc).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Paths visiting `loc` at an offset in `[lo, hi]`, in id order.
    pub fn get_paths_from_index(&self, loc: LocationId, lo: Seconds, hi: Seconds) -> Vec<PathId> {
        if hi < lo || hi < 0 {
            return Vec::new();
        }
        let lo = lo.max(0);
        let mut out = Vec::new();
        let range = (loc, lo.div_euclid(self.bucket_width))..=(loc, hi.div_euclid(self.bucket_width));
        for ids in self.by_visit.range(range).map(|(_, v)| v) {
            for &id in ids {
                let off = self.paths[id.index()].offset_of(loc).expect("indexed visit");
                if (lo..=hi).contains(&off) {
                    out.push(id);
                }
            }
        }
        out.sort();
        out
    }
}
