use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::TagId;
use crate::error::{Error, Result};

/// Provenance key of a stored chunk: owning document plus 0-based ordinal.
/// Ordered by `(doc, ordinal)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChunkId {
    pub doc: Arc<str>,
    pub ordinal: u32,
}

impl ChunkId {
    pub fn new(doc: impl Into<Arc<str>>, ordinal: u32) -> Self {
        ChunkId {
            doc: doc.into(),
            ordinal,
        }
    }
}

impl fmt::Display for ChunkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.doc, self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub id: ChunkId,
    pub text: Arc<str>,
    pub token_count: u32,
    /// De-duplicated, in the order the tagger produced them.
    pub tags: Vec<TagId>,
}

/// Tag → chunk mapping plus the chunk store itself.
///
/// Chunks live in insertion-ordered slots; each posting list holds slot
/// numbers in ascending order, which makes intersections a linear merge.
/// Everything returned through the public API is in `(doc, ordinal)` order.
#[derive(Debug, Clone, Default)]
pub struct ChunkIndex {
    chunks: Vec<Chunk>,
    slots: HashMap<ChunkId, u32>,
    postings: Vec<Vec<u32>>,
    documents: BTreeMap<Arc<str>, u32>,
    total_tokens: u64,
    /// Position of each slot in `(doc, ordinal)` order; rebuilt on first use
    /// after an insert.
    id_rank: OnceLock<Vec<u32>>,
}

impl ChunkIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores a chunk and posts it under each of its tags.
    pub fn insert(&mut self, mut chunk: Chunk) -> Result<u32> {
        if self.slots.contains_key(&chunk.id) {
            return Err(Error::DuplicateChunk(chunk.id));
        }
        let mut seen = Vec::with_capacity(chunk.tags.len());
        chunk.tags.retain(|t| {
            if seen.contains(t) {
                false
            } else {
                seen.push(*t);
                true
            }
        });

        let slot = self.chunks.len() as u32;
        for &tag in &chunk.tags {
            if self.postings.len() <= tag.index() {
                self.postings.resize_with(tag.index() + 1, Vec::new);
            }
            self.postings[tag.index()].push(slot);
        }
        *self.documents.entry(chunk.id.doc.clone()).or_insert(0) += 1;
        self.total_tokens += u64::from(chunk.token_count);
        self.slots.insert(chunk.id.clone(), slot);
        self.chunks.push(chunk);
        self.id_rank = OnceLock::new();
        Ok(slot)
    }

    pub fn get(&self, id: &ChunkId) -> Option<&Chunk> {
        self.slots.get(id).map(|&s| &self.chunks[s as usize])
    }

    pub(crate) fn by_slot(&self, slot: u32) -> &Chunk {
        &self.chunks[slot as usize]
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn contains_document(&self, doc: &str) -> bool {
        self.documents.contains_key(doc)
    }

    /// Document ids with their chunk counts, sorted by id.
    pub fn documents(&self) -> impl Iterator<Item = (&str, u32)> + '_ {
        self.documents.iter().map(|(d, &n)| (&**d, n))
    }

    /// All chunks in `(doc, ordinal)` order.
    pub fn chunks_sorted(&self) -> Vec<&Chunk> {
        let mut all: Vec<&Chunk> = self.chunks.iter().collect();
        all.sort_unstable_by(|a, b| a.id.cmp(&b.id));
        all
    }

    /// For each slot, its position among all chunks in `(doc, ordinal)`
    /// order. Comparing ranks is equivalent to comparing chunk ids.
    pub(crate) fn id_ranks(&self) -> &[u32] {
        self.id_rank.get_or_init(|| {
            let mut order: Vec<u32> = (0..self.chunks.len() as u32).collect();
            order.sort_unstable_by(|&a, &b| self.chunks[a as usize].id.cmp(&self.chunks[b as usize].id));
            let mut rank = vec![0; order.len()];
            for (pos, slot) in order.into_iter().enumerate() {
                rank[slot as usize] = pos as u32;
            }
            rank
        })
    }

    pub(crate) fn posting_slots(&self, tag: TagId) -> &[u32] {
        self.postings.get(tag.index()).map_or(&[], Vec::as_slice)
    }

    /// Chunks tagged with `tag`, sorted by `(doc, ordinal)`.
    pub fn postings(&self, tag: TagId) -> Vec<ChunkId> {
        self.sorted_ids(self.posting_slots(tag))
    }

    pub(crate) fn edge_slots(&self, a: TagId, b: TagId) -> Vec<u32> {
        intersect_sorted(self.posting_slots(a), self.posting_slots(b))
    }

    /// Chunks that contributed to edge `{a, b}`: the intersection of both
    /// posting lists. Its size equals the edge weight.
    pub fn chunks_for_edge(&self, a: TagId, b: TagId) -> Result<Vec<ChunkId>> {
        if a == b {
            return Err(Error::InvalidPair(a));
        }
        Ok(self.sorted_ids(&self.edge_slots(a, b)))
    }

    fn sorted_ids(&self, slots: &[u32]) -> Vec<ChunkId> {
        let mut ids: Vec<ChunkId> = slots
            .iter()
            .map(|&s| self.chunks[s as usize].id.clone())
            .collect();
        ids.sort_unstable();
        ids
    }
}

/// Intersection of two ascending slot lists. Gallops through the longer list
/// when the sizes are lopsided.
pub(crate) fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut out = Vec::with_capacity(small.len());
    if small.is_empty() {
        return out;
    }
    if large.len() / small.len() >= 16 {
        let mut rest = large;
        for &x in small {
            let mut step = 1;
            while step < rest.len() && rest[step] < x {
                step *= 2;
            }
            let end = (step + 1).min(rest.len());
            match rest[..end].binary_search(&x) {
                Ok(i) => {
                    out.push(x);
                    rest = &rest[i + 1..];
                }
                Err(i) => rest = &rest[i..],
            }
            if rest.is_empty() {
                break;
            }
        }
    } else {
        let (mut i, mut j) = (0, 0);
        while i < small.len() && j < large.len() {
            match small[i].cmp(&large[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(small[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    out
}
