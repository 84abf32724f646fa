//! Store persistence: a checksummed binary snapshot and a JSON-lines
//! interchange form. Both go through [`StoreSnapshot`], which carries the
//! canonical table layout and performs all load-time validation.

mod binary;
mod jsonl;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use binary::{decode_snapshot, encode_snapshot, load_snapshot, save_snapshot, FORMAT_VERSION, MAGIC};
pub use jsonl::{export_jsonl, import_jsonl, read_jsonl, write_jsonl, JsonlRecord, JSONL_FORMAT};

use crate::error::{Error, Result};
use crate::graph::{Chunk, ChunkId, ChunkIndex, EdgeKey, Tag, TagGraph, TagId};
use crate::store::{MemoryStore, StoreConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotChunk {
    pub doc: String,
    pub ordinal: u32,
    pub token_count: u32,
    pub tags: Vec<u32>,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotEdge {
    pub a: u32,
    pub b: u32,
    pub weight: u32,
}

/// Canonical table form of a store: tags by id, chunks by `(doc, ordinal)`,
/// edges by `(a, b)` with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct StoreSnapshot {
    pub format_version: u32,
    pub config: StoreConfig,
    pub tags: Vec<String>,
    pub chunks: Vec<SnapshotChunk>,
    pub edges: Vec<SnapshotEdge>,
}

impl PartialEq for StoreConfig {
    fn eq(&self, other: &Self) -> bool {
        serde_json::to_value(self).ok() == serde_json::to_value(other).ok()
    }
}

impl StoreSnapshot {
    pub fn from_store(store: &MemoryStore) -> Self {
        let tags = store
            .graph()
            .tags()
            .map(|(_, t)| t.as_str().to_owned())
            .collect();
        let chunks = store
            .index()
            .chunks_sorted()
            .into_iter()
            .map(|c| SnapshotChunk {
                doc: c.id.doc.to_string(),
                ordinal: c.id.ordinal,
                token_count: c.token_count,
                tags: c.tags.iter().map(|t| t.0).collect(),
                text: c.text.to_string(),
            })
            .collect();
        let edges = store
            .graph()
            .edges()
            .into_iter()
            .map(|(a, b, w)| SnapshotEdge {
                a: a.0,
                b: b.0,
                weight: w.0,
            })
            .collect();
        StoreSnapshot {
            format_version: FORMAT_VERSION,
            config: store.config().clone(),
            tags,
            chunks,
            edges,
        }
    }

    /// Validates every table invariant and rebuilds the store. The edge table
    /// must match a recount from the chunk tag sets exactly.
    pub fn into_store(self) -> Result<MemoryStore> {
        let corrupt = |msg: String| Error::CorruptSnapshot(msg);
        let tag_count = self.tags.len() as u32;

        let mut graph = TagGraph::new();
        for (i, surface) in self.tags.iter().enumerate() {
            let tag = Tag::new(surface).map_err(|_| corrupt(format!("tag {i} is empty")))?;
            if tag.as_str() != surface {
                return Err(corrupt(format!("tag {i} ({surface:?}) is not normalized")));
            }
            if graph.intern(&tag).index() != i {
                return Err(corrupt(format!("tag {i} ({surface:?}) is a duplicate")));
            }
        }

        let mut index = ChunkIndex::new();
        let mut recount: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut next_ordinal: BTreeMap<&str, u32> = BTreeMap::new();
        let mut prev: Option<(&str, u32)> = None;
        for c in &self.chunks {
            let key = (c.doc.as_str(), c.ordinal);
            if prev.is_some_and(|p| p >= key) {
                return Err(corrupt(format!("chunk table out of order at {}#{}", c.doc, c.ordinal)));
            }
            prev = Some(key);
            let expected = next_ordinal.entry(c.doc.as_str()).or_insert(0);
            if c.ordinal != *expected {
                return Err(corrupt(format!("document {:?} skips ordinal {expected}", c.doc)));
            }
            *expected += 1;

            let mut seen = HashSet::new();
            for &t in &c.tags {
                if t >= tag_count {
                    return Err(corrupt(format!("chunk {}#{} references tag {t}", c.doc, c.ordinal)));
                }
                if !seen.insert(t) {
                    return Err(corrupt(format!("chunk {}#{} repeats tag {t}", c.doc, c.ordinal)));
                }
            }
            let mut sorted: Vec<u32> = c.tags.clone();
            sorted.sort_unstable();
            for (i, &a) in sorted.iter().enumerate() {
                for &b in &sorted[i + 1..] {
                    *recount.entry((a, b)).or_insert(0) += 1;
                }
            }

            let id = ChunkId::new(c.doc.as_str(), c.ordinal);
            graph.mark_recorded(id.clone());
            index.insert(Chunk {
                id,
                text: c.text.as_str().into(),
                token_count: c.token_count,
                tags: c.tags.iter().map(|&t| TagId(t)).collect(),
            })?;
        }

        let mut prev_edge: Option<(u32, u32)> = None;
        for e in &self.edges {
            if e.a >= e.b {
                return Err(corrupt(format!("edge ({}, {}) is not in a < b form", e.a, e.b)));
            }
            if e.b >= tag_count {
                return Err(corrupt(format!("edge ({}, {}) references an unknown tag", e.a, e.b)));
            }
            if e.weight == 0 {
                return Err(corrupt(format!("edge ({}, {}) has weight 0", e.a, e.b)));
            }
            if prev_edge.is_some_and(|p| p >= (e.a, e.b)) {
                return Err(corrupt(format!("edge table out of order at ({}, {})", e.a, e.b)));
            }
            prev_edge = Some((e.a, e.b));
            if recount.remove(&(e.a, e.b)) != Some(e.weight) {
                return Err(corrupt(format!(
                    "edge ({}, {}) weight {} disagrees with the chunk table",
                    e.a, e.b, e.weight
                )));
            }
            graph.restore_edge(EdgeKey::new(TagId(e.a), TagId(e.b)), e.weight);
        }
        if let Some(((a, b), _)) = recount.into_iter().next() {
            return Err(corrupt(format!("edge ({a}, {b}) is missing from the edge table")));
        }

        self.config
            .validate()
            .map_err(|e| corrupt(format!("stored configuration is invalid: {e}")))?;
        Ok(MemoryStore::from_parts(graph, index, self.config))
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and an atomic rename.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
