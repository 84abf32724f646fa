use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ChunkId, Tag, TagId};
use crate::error::{Error, Result};

/// Number of distinct chunks in which both endpoints of an edge were tagged.
/// Stored edges always have a count of at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeWeight(pub u32);

impl EdgeWeight {
    pub fn get(self) -> u32 {
        self.0
    }
}

/// Orders neighbors by descending weight, then ascending surface. Surfaces
/// are unique, so `tag` never decides a comparison.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Ranked {
    weight: Reverse<u32>,
    surface: Arc<str>,
    tag: TagId,
}

/// Canonical undirected key with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct EdgeKey {
    pub lo: TagId,
    pub hi: TagId,
}

impl EdgeKey {
    pub(crate) fn new(a: TagId, b: TagId) -> Self {
        if a < b {
            EdgeKey { lo: a, hi: b }
        } else {
            EdgeKey { lo: b, hi: a }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDelta {
    pub a: TagId,
    pub b: TagId,
    pub weight: EdgeWeight,
}

impl EdgeDelta {
    /// True when this increment created the edge.
    pub fn created(&self) -> bool {
        self.weight.0 == 1
    }
}

/// A tag reached through one intermediary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondDegree {
    pub tag: TagId,
    pub score: f64,
    /// First-degree neighbor on the best-scoring path.
    pub via: TagId,
}

/// Undirected co-occurrence graph over interned tags.
///
/// Edge weights live in a single canonical map; each node additionally keeps
/// its neighbors in an ordered set so top-k reads are prefix scans.
#[derive(Debug, Clone, Default)]
pub struct TagGraph {
    surfaces: Vec<Tag>,
    /// Shared copies of `surfaces` for the ranked neighbor sets.
    keys: Vec<Arc<str>>,
    ids: HashMap<Tag, TagId>,
    ranked: Vec<BTreeSet<Ranked>>,
    weights: HashMap<EdgeKey, u32>,
    recorded: HashSet<ChunkId>,
    total_weight: u64,
}

impl TagGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern_tag(&mut self, surface: &str) -> Result<TagId> {
        let tag = Tag::new(surface)?;
        Ok(self.intern(&tag))
    }

    pub fn intern(&mut self, tag: &Tag) -> TagId {
        if let Some(&id) = self.ids.get(tag) {
            return id;
        }
        let id = TagId(self.surfaces.len() as u32);
        self.surfaces.push(tag.clone());
        self.keys.push(Arc::from(tag.as_str()));
        self.ids.insert(tag.clone(), id);
        self.ranked.push(BTreeSet::new());
        id
    }

    /// Looks up a raw surface after normalization.
    pub fn tag_id(&self, surface: &str) -> Option<TagId> {
        Tag::new(surface).ok().and_then(|t| self.id_of(&t))
    }

    pub fn id_of(&self, tag: &Tag) -> Option<TagId> {
        self.ids.get(tag).copied()
    }

    pub fn surface(&self, id: TagId) -> Option<&Tag> {
        self.surfaces.get(id.index())
    }

    pub fn contains(&self, id: TagId) -> bool {
        id.index() < self.surfaces.len()
    }

    /// All interned tags in id order.
    pub fn tags(&self) -> impl ExactSizeIterator<Item = (TagId, &Tag)> + '_ {
        self.surfaces
            .iter()
            .enumerate()
            .map(|(i, t)| (TagId(i as u32), t))
    }

    fn check(&self, id: TagId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownTag(id))
        }
    }

    pub fn is_recorded(&self, chunk: &ChunkId) -> bool {
        self.recorded.contains(chunk)
    }

    /// Adds one complete subgraph for a chunk's tag set: every unordered pair
    /// gains exactly +1. Duplicate ids in `tags` are ignored.
    pub fn record_cooccurrence(&mut self, tags: &[TagId], chunk: &ChunkId) -> Result<Vec<EdgeDelta>> {
        if self.recorded.contains(chunk) {
            return Err(Error::DuplicateChunk(chunk.clone()));
        }
        for &t in tags {
            self.check(t)?;
        }
        let mut set: Vec<TagId> = tags.to_vec();
        set.sort_unstable();
        set.dedup();

        let mut deltas = Vec::with_capacity(set.len() * set.len().saturating_sub(1) / 2);
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                let weight = self.increment(a, b);
                deltas.push(EdgeDelta {
                    a,
                    b,
                    weight: EdgeWeight(weight),
                });
            }
        }
        self.recorded.insert(chunk.clone());
        Ok(deltas)
    }

    fn increment(&mut self, a: TagId, b: TagId) -> u32 {
        let slot = self.weights.entry(EdgeKey::new(a, b)).or_insert(0);
        let old = *slot;
        *slot += 1;
        let new = *slot;
        for (from, to) in [(a, b), (b, a)] {
            let surface = &self.keys[to.index()];
            let set = &mut self.ranked[from.index()];
            if old > 0 {
                set.remove(&Ranked {
                    weight: Reverse(old),
                    surface: surface.clone(),
                    tag: to,
                });
            }
            set.insert(Ranked {
                weight: Reverse(new),
                surface: surface.clone(),
                tag: to,
            });
        }
        self.total_weight += 1;
        new
    }

    /// Restores an edge with a known weight. Used by snapshot loading; the
    /// caller guarantees the key is new and the weight positive.
    pub(crate) fn restore_edge(&mut self, key: EdgeKey, weight: u32) {
        debug_assert!(weight > 0 && key.lo < key.hi);
        self.weights.insert(key, weight);
        for (from, to) in [(key.lo, key.hi), (key.hi, key.lo)] {
            self.ranked[from.index()].insert(Ranked {
                weight: Reverse(weight),
                surface: self.keys[to.index()].clone(),
                tag: to,
            });
        }
        self.total_weight += u64::from(weight);
    }

    pub(crate) fn mark_recorded(&mut self, chunk: ChunkId) {
        self.recorded.insert(chunk);
    }

    pub fn weight(&self, a: TagId, b: TagId) -> Option<EdgeWeight> {
        if a == b {
            return None;
        }
        self.weights.get(&EdgeKey::new(a, b)).map(|&w| EdgeWeight(w))
    }

    /// Orders tags by surface. This is the tie-break for every top-k
    /// selection; unlike ids it does not depend on ingest order.
    pub fn surface_cmp(&self, a: TagId, b: TagId) -> std::cmp::Ordering {
        self.keys[a.index()].cmp(&self.keys[b.index()])
    }

    /// Neighbors of `tag` in (descending weight, ascending surface) order.
    /// Unknown tags have no neighbors.
    pub fn neighbors(&self, tag: TagId) -> impl Iterator<Item = (TagId, EdgeWeight)> + '_ {
        self.ranked
            .get(tag.index())
            .into_iter()
            .flat_map(|set| set.iter().map(|r| (r.tag, EdgeWeight(r.weight.0))))
    }

    pub fn degree(&self, tag: TagId) -> usize {
        self.ranked.get(tag.index()).map_or(0, BTreeSet::len)
    }

    pub fn top_first_degree(&self, seed: TagId, x: usize) -> Result<Vec<(TagId, EdgeWeight)>> {
        self.check(seed)?;
        Ok(self.neighbors(seed).take(x).collect())
    }

    /// Top `y` tags reachable through one of `first`, excluding the seed and
    /// `first` itself. A candidate's score is
    /// `max over m in first of weight(seed, m) * weight(m, c) * decay`.
    pub fn top_second_degree(
        &self,
        seed: TagId,
        first: &[TagId],
        y: usize,
        decay: f64,
    ) -> Result<Vec<SecondDegree>> {
        self.check(seed)?;
        for &m in first {
            self.check(m)?;
        }
        if y == 0 {
            return Ok(Vec::new());
        }
        let excluded: HashSet<TagId> = first.iter().copied().chain([seed]).collect();
        let bridges: Vec<(TagId, f64)> = first
            .iter()
            .filter_map(|&m| self.weight(seed, m).map(|w| (m, f64::from(w.0))))
            .collect();

        // Each intermediary ranks its own neighbors in the same order as the
        // path score through it, so the global top-y is contained in the union
        // of every intermediary's top-y non-excluded neighbors.
        let mut candidates: Vec<TagId> = Vec::new();
        for &(m, _) in &bridges {
            candidates.extend(
                self.neighbors(m)
                    .map(|(c, _)| c)
                    .filter(|c| !excluded.contains(c))
                    .take(y),
            );
        }
        candidates.sort_unstable();
        candidates.dedup();

        let mut scored: Vec<SecondDegree> = candidates
            .into_iter()
            .filter_map(|c| {
                let mut best: Option<(f64, TagId)> = None;
                for &(m, seed_w) in &bridges {
                    if let Some(w) = self.weight(m, c) {
                        let score = seed_w * f64::from(w.0) * decay;
                        let better = match best {
                            None => true,
                            Some((s, via)) => score > s || (score == s && self.surface_cmp(m, via).is_lt()),
                        };
                        if better {
                            best = Some((score, m));
                        }
                    }
                }
                best.map(|(score, via)| SecondDegree { tag: c, score, via })
            })
            .collect();
        scored.sort_by(|l, r| r.score.total_cmp(&l.score).then_with(|| self.surface_cmp(l.tag, r.tag)));
        scored.truncate(y);
        Ok(scored)
    }

    pub fn node_count(&self) -> usize {
        self.surfaces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn max_degree(&self) -> usize {
        self.ranked.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// All edges as `(a, b, weight)` with `a < b`, sorted by `(a, b)`.
    pub fn edges(&self) -> Vec<(TagId, TagId, EdgeWeight)> {
        let mut out: Vec<_> = self
            .weights
            .iter()
            .map(|(k, &w)| (k.lo, k.hi, EdgeWeight(w)))
            .collect();
        out.sort_unstable_by_key(|&(a, b, _)| (a, b));
        out
    }
}
