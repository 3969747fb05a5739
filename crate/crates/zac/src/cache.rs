//! Binary cache of enumerated partial paths, keyed by a digest of the
//! network and the enumeration settings.

use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;
use zac_core::pathstore::{enumerate_paths, PartialPath, PathStoreError};
use zac_core::{LocationId, RoadNetwork, Seconds};

const MAGIC: &[u8; 8] = b"ZACPATH1";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}: not a path cache or truncated")]
    Corrupt(PathBuf),
    #[error(transparent)]
    Paths(#[from] PathStoreError),
}

/// Hex digest over every edge, the node count and `settings`.
pub fn cache_key(net: &RoadNetwork, settings: &str) -> String {
    let mut h = Sha256::new();
    h.update((net.len() as u64).to_le_bytes());
    for a in net.locations() {
        h.update(net.name(a).as_bytes());
        h.update([0]);
        for &(b, t) in net.out_edges(a) {
            h.update(b.0.to_le_bytes());
            h.update(t.to_le_bytes());
        }
    }
    h.update(settings.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode(key: &str, paths: &[PartialPath]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(key.len() as u32).to_le_bytes());
    out.extend_from_slice(key.as_bytes());
    out.extend_from_slice(&(paths.len() as u64).to_le_bytes());
    for p in paths {
        out.extend_from_slice(&(p.nodes.len() as u32).to_le_bytes());
        for (n, o) in p.nodes.iter().zip(&p.offsets) {
            out.extend_from_slice(&n.0.to_le_bytes());
            out.extend_from_slice(&o.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        if self.buf.len() < n {
            return None;
        }
        let (a, b) = self.buf.split_at(n);
        self.buf = b;
        Some(a)
    }
    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }
    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

/// `(key, paths)`, or `None` for malformed input.
pub fn decode(buf: &[u8]) -> Option<(String, Vec<PartialPath>)> {
    let mut r = Reader { buf };
    if r.take(8)? != MAGIC {
        return None;
    }
    let klen = r.u32()? as usize;
    let key = String::from_utf8(r.take(klen)?.to_vec()).ok()?;
    let count = r.u64()? as usize;
    let mut paths = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let len = r.u32()? as usize;
        let mut nodes = Vec::with_capacity(len);
        let mut offsets = Vec::with_capacity(len);
        for _ in 0..len {
            nodes.push(LocationId(r.u32()?));
            offsets.push(r.u64()? as Seconds);
        }
        paths.push(PartialPath { nodes, offsets });
    }
    r.buf.is_empty().then_some((key, paths))
}

pub fn save(path: &Path, key: &str, paths: &[PartialPath]) -> Result<(), CacheError> {
    fs::write(path, encode(key, paths)).map_err(|source| CacheError::Io { path: path.into(), source })
}

/// Paths stored under `key`, `None` when the file is absent or was built
/// for something else.
pub fn load(path: &Path, key: &str) -> Result<Option<Vec<PartialPath>>, CacheError> {
    let buf = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(source) => return Err(CacheError::Io { path: path.into(), source }),
    };
    let (stored, paths) = decode(&buf).ok_or_else(|| CacheError::Corrupt(path.into()))?;
    Ok((stored == key).then_some(paths))
}

/// Full enumeration for `tau`, through the cache file in `dir` when given.
pub fn enumerate_cached(
    net: &RoadNetwork,
    tau: Seconds,
    budget: usize,
    dir: Option<&Path>,
) -> Result<Vec<PartialPath>, CacheError> {
    let key = cache_key(net, &format!("enumerate tau={tau}"));
    let file = dir.map(|d| d.join(format!("paths-{}.bin", &key[..16])));
    if let Some(f) = &file {
        if let Some(paths) = load(f, &key)? {
            log::info!("loaded {} paths from {}", paths.len(), f.display());
            return Ok(paths);
        }
    }
    let paths = enumerate_paths(net, tau, budget)?.paths;
    if let (Some(d), Some(f)) = (dir, &file) {
        fs::create_dir_all(d).map_err(|source| CacheError::Io { path: d.into(), source })?;
        save(f, &key, &paths)?;
    }
    Ok(paths)
}
