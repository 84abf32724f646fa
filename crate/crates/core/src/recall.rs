//! Query tags → neighborhood subgraph → edge-provenance chunks.
//!
//! Everything after query tagging is a pure traversal over the store: no
//! model, embedding or network call happens there.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ChunkId, ChunkIndex, EdgeWeight, SecondDegree, Tag, TagGraph, TagId};
use crate::instrument;
use crate::store::MemoryStore;
use crate::tagger::Tagger;

pub const DEFAULT_X: usize = 5;
pub const DEFAULT_Y: usize = 3;
pub const DEFAULT_DECAY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalParams {
    /// First-degree neighbors kept per query tag.
    pub x: usize,
    /// Second-degree neighbors kept per query tag.
    pub y: usize,
    /// Multiplier on two-hop path scores, in `(0, 1]`.
    pub decay: f64,
    pub max_context_tokens: Option<usize>,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        RetrievalParams {
            x: DEFAULT_X,
            y: DEFAULT_Y,
            decay: DEFAULT_DECAY,
            max_context_tokens: None,
        }
    }
}

impl RetrievalParams {
    pub fn new(x: usize, y: usize) -> Self {
        RetrievalParams {
            x,
            y,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "decay must be in (0, 1], got {}",
                self.decay
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagExpansion {
    pub tag: TagId,
    pub first: Vec<(TagId, EdgeWeight)>,
    pub second: Vec<SecondDegree>,
}

/// An edge spanned by the query subgraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedEdge {
    pub a: TagId,
    pub b: TagId,
    pub weight: EdgeWeight,
    /// Raw weight for edges touching a query tag; decayed path score for
    /// edges one hop further out. The larger value wins when an edge plays
    /// both roles.
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySubgraph {
    pub query_tags: Vec<TagId>,
    pub expansions: Vec<TagExpansion>,
    /// Each pair has the lexically smaller surface as `a`; sorted by the
    /// surfaces of `(a, b)`.
    pub retrieved_edges: Vec<RetrievedEdge>,
}

impl QuerySubgraph {
    /// Query tags plus every selected neighbor.
    pub fn nodes(&self) -> BTreeSet<TagId> {
        let mut nodes: BTreeSet<TagId> = self.query_tags.iter().copied().collect();
        for e in &self.expansions {
            nodes.extend(e.first.iter().map(|(t, _)| *t));
            nodes.extend(e.second.iter().map(|s| s.tag));
        }
        nodes
    }

    /// Retrieved edges as `(lower id, higher id)` pairs.
    pub fn edge_pairs(&self) -> BTreeSet<(TagId, TagId)> {
        self.retrieved_edges
            .iter()
            .map(|e| (e.a.min(e.b), e.a.max(e.b)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextChunk {
    pub id: ChunkId,
    pub text: Arc<str>,
    pub token_count: u32,
    pub score: f64,
    /// Retrieved edges whose endpoints both tag this chunk.
    pub provenance: Vec<(TagId, TagId)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecallContext {
    pub chunks: Vec<ContextChunk>,
    pub total_tokens: u64,
}

impl RecallContext {
    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunk_ids(&self) -> Vec<ChunkId> {
        self.chunks.iter().map(|c| c.id.clone()).collect()
    }

    /// Chunk texts joined by blank lines, ready to hand to a reader model.
    pub fn render(&self) -> String {
        self.chunks
            .iter()
            .map(|c| &*c.text)
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RecallTiming {
    pub tagging: Duration,
    pub traversal: Duration,
    /// External calls observed while traversing; always 0.
    pub traversal_external_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallOutcome {
    pub query_tags: Vec<Tag>,
    pub subgraph: QuerySubgraph,
    pub context: RecallContext,
    pub timing: RecallTiming,
}

/// Expands each query tag to its top-x first-degree and top-y second-degree
/// neighbors and collects the edges on those paths.
///
/// Retrieved edges are: query tag → first-degree; first-degree ↔
/// first-degree of the same query tag; first-degree → selected
/// second-degree; and query tag ↔ query tag.
pub fn build_query_subgraph(
    graph: &TagGraph,
    query_tags: &[TagId],
    params: &RetrievalParams,
) -> Result<QuerySubgraph> {
    params.validate()?;
    let mut tags: Vec<TagId> = Vec::with_capacity(query_tags.len());
    for &t in query_tags {
        if graph.contains(t) && !tags.contains(&t) {
            tags.push(t);
        }
    }
    if tags.is_empty() {
        return Err(Error::NoKnownTags);
    }

    let mut edges: HashMap<(TagId, TagId), (EdgeWeight, f64)> = HashMap::new();
    let mut add = |a: TagId, b: TagId, weight: EdgeWeight, strength: f64| {
        let key = if graph.surface_cmp(a, b).is_lt() { (a, b) } else { (b, a) };
        let slot = edges.entry(key).or_insert((weight, strength));
        if strength > slot.1 {
            slot.1 = strength;
        }
    };

    let mut expansions = Vec::with_capacity(tags.len());
    for &q in &tags {
        let first = graph.top_first_degree(q, params.x)?;
        let first_ids: Vec<TagId> = first.iter().map(|(t, _)| *t).collect();
        let second = graph.top_second_degree(q, &first_ids, params.y, params.decay)?;

        for &(m, w) in &first {
            add(q, m, w, f64::from(w.0));
        }
        for (i, &(m1, w1)) in first.iter().enumerate() {
            for &(m2, w2) in &first[i + 1..] {
                if let Some(w) = graph.weight(m1, m2) {
                    let bridge = f64::from(w1.0.max(w2.0));
                    add(m1, m2, w, bridge * f64::from(w.0) * params.decay);
                }
            }
        }
        for &(m, wm) in &first {
            for s in &second {
                if let Some(w) = graph.weight(m, s.tag) {
                    add(m, s.tag, w, f64::from(wm.0) * f64::from(w.0) * params.decay);
                }
            }
        }
        expansions.push(TagExpansion {
            tag: q,
            first,
            second,
        });
    }
    for (i, &q1) in tags.iter().enumerate() {
        for &q2 in &tags[i + 1..] {
            if let Some(w) = graph.weight(q1, q2) {
                add(q1, q2, w, f64::from(w.0));
            }
        }
    }

    let mut retrieved_edges: Vec<RetrievedEdge> = edges
        .into_iter()
        .map(|((a, b), (weight, strength))| RetrievedEdge {
            a,
            b,
            weight,
            strength,
        })
        .collect();
    retrieved_edges.sort_by(|l, r| {
        graph
            .surface_cmp(l.a, r.a)
            .then_with(|| graph.surface_cmp(l.b, r.b))
    });

    Ok(QuerySubgraph {
        query_tags: tags,
        expansions,
        retrieved_edges,
    })
}

/// Gathers every chunk that contributed to a retrieved edge.
///
/// A chunk's score is the sum of the strengths of the retrieved edges it
/// supports. Chunks are ordered by descending score, then chunk id, and cut
/// at the first chunk that would overflow `max_context_tokens`.
pub fn collect_context(index: &ChunkIndex, subgraph: &QuerySubgraph, params: &RetrievalParams) -> RecallContext {
    let per_edge = edge_slot_lists(index, &subgraph.retrieved_edges);

    // Dense per-slot accumulators; `hit` lists the slots touched, in first-hit order.
    let mut score = vec![0.0f64; index.len()];
    let mut support = vec![0u32; index.len()];
    let mut hit: Vec<u32> = Vec::new();
    for (e, slots) in subgraph.retrieved_edges.iter().zip(&per_edge) {
        for &slot in slots {
            let i = slot as usize;
            if support[i] == 0 {
                hit.push(slot);
            }
            support[i] += 1;
            score[i] += e.strength;
        }
    }

    // Strengths are positive, so the bit pattern of a score orders like the
    // score itself and the sort can run on plain integer keys.
    let rank = index.id_ranks();
    let mut order: Vec<(u64, u32, u32)> = hit
        .iter()
        .map(|&slot| (!score[slot as usize].to_bits(), rank[slot as usize], slot))
        .collect();
    order.sort_unstable();
    let hit: Vec<u32> = order.into_iter().map(|(_, _, slot)| slot).collect();

    let mut total_tokens = 0u64;
    let mut kept = hit.len();
    for (n, &slot) in hit.iter().enumerate() {
        let tokens = u64::from(index.by_slot(slot).token_count);
        if params.max_context_tokens.is_some_and(|cap| total_tokens + tokens > cap as u64) {
            kept = n;
            break;
        }
        total_tokens += tokens;
    }

    let mut chunks: Vec<ContextChunk> = Vec::with_capacity(kept);
    for &slot in &hit[..kept] {
        let chunk = index.by_slot(slot);
        chunks.push(ContextChunk {
            id: chunk.id.clone(),
            text: Arc::clone(&chunk.text),
            token_count: chunk.token_count,
            score: score[slot as usize],
            provenance: Vec::with_capacity(support[slot as usize] as usize),
        });
    }
    // Reuse `support` as slot -> output position for the kept chunks.
    support.iter_mut().for_each(|p| *p = u32::MAX);
    for (pos, &slot) in hit[..kept].iter().enumerate() {
        support[slot as usize] = pos as u32;
    }
    for (e, slots) in subgraph.retrieved_edges.iter().zip(&per_edge) {
        for &slot in slots {
            if let Some(c) = chunks.get_mut(support[slot as usize] as usize) {
                c.provenance.push((e.a, e.b));
            }
        }
    }

    RecallContext { chunks, total_tokens }
}

/// Posting lists longer than one slot in this many are turned into bitsets.
const DENSE_FRACTION: usize = 32;

/// Supporting slots of every retrieved edge, each list ascending.
///
/// Hub tags tend to sit on many retrieved edges at once. Their postings are
/// expanded once into bitsets so that each edge touching them costs a word-wise
/// AND or a bit probe per sparse entry instead of a merge over a long list.
fn edge_slot_lists(index: &ChunkIndex, edges: &[RetrievedEdge]) -> Vec<Vec<u32>> {
    let words = index.len().div_ceil(64);
    let threshold = (index.len() / DENSE_FRACTION).max(64);
    let mut bitsets: HashMap<TagId, Vec<u64>> = HashMap::new();
    for e in edges {
        for t in [e.a, e.b] {
            let postings = index.posting_slots(t);
            if postings.len() >= threshold {
                bitsets.entry(t).or_insert_with(|| {
                    let mut bits = vec![0u64; words];
                    for &s in postings {
                        bits[s as usize / 64] |= 1 << (s % 64);
                    }
                    bits
                });
            }
        }
    }

    edges
        .iter()
        .map(|e| match (bitsets.get(&e.a), bitsets.get(&e.b)) {
            (Some(a), Some(b)) => {
                let mut out = Vec::with_capacity(e.weight.0 as usize);
                for (w, (x, y)) in a.iter().zip(b).enumerate() {
                    let mut m = x & y;
                    while m != 0 {
                        out.push((w * 64) as u32 + m.trailing_zeros());
                        m &= m - 1;
                    }
                }
                out
            }
            (Some(bits), None) => probe(bits, index.posting_slots(e.b)),
            (None, Some(bits)) => probe(bits, index.posting_slots(e.a)),
            (None, None) => index.edge_slots(e.a, e.b),
        })
        .collect()
}

fn probe(bits: &[u64], sparse: &[u32]) -> Vec<u32> {
    sparse
        .iter()
        .copied()
        .filter(|&s| bits[s as usize / 64] >> (s % 64) & 1 == 1)
        .collect()
}

/// Full recall over a store: tag the query against the store vocabulary,
/// then traverse. Tagging failures other than "nothing matched" are only
/// possible with an external tagger.
pub fn recall(
    store: &MemoryStore,
    query_text: &str,
    params: &RetrievalParams,
    tagger: &dyn Tagger,
) -> Result<RecallOutcome> {
    params.validate()?;
    let started = Instant::now();
    let query_tags = match tagger.tag_query(query_text, store.vocabulary()) {
        Ok(tags) => tags,
        Err(Error::NoTagsFound) => return Err(Error::NoKnownTags),
        Err(e) => return Err(e),
    };
    let tagging = started.elapsed();

    let calls_before = instrument::external_calls();
    let traversal_start = Instant::now();
    let ids: Vec<TagId> = query_tags
        .iter()
        .filter_map(|t| store.graph().id_of(t))
        .collect();
    let subgraph = build_query_subgraph(store.graph(), &ids, params)?;
    let context = collect_context(store.index(), &subgraph, params);
    let traversal = traversal_start.elapsed();
    let traversal_external_calls = instrument::external_calls() - calls_before;

    Ok(RecallOutcome {
        query_tags,
        subgraph,
        context,
        timing: RecallTiming {
            tagging,
            traversal,
            traversal_external_calls,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagger::DeterministicTagger;

    /// Builds a store from `(doc, [tags])` chunks, one chunk per entry.
    fn store(chunks: &[(&str, &[&str])]) -> MemoryStore {
        let mut s = MemoryStore::new();
        for (i, (doc, tags)) in chunks.iter().enumerate() {
            let text = format!("{doc} chunk {i}: {}", tags.join(" "));
            s.ingest_pretagged(&format!("{doc}-{i}"), [(text, tags.to_vec())]).unwrap();
        }
        s
    }

    fn id(s: &MemoryStore, t: &str) -> TagId {
        s.graph().tag_id(t).unwrap()
    }

    fn chain() -> MemoryStore {
        let mut entries: Vec<(&str, &[&str])> = Vec::new();
        entries.extend(std::iter::repeat_n(("ab", &["a", "b"][..]), 4));
        entries.extend(std::iter::repeat_n(("bc", &["b", "c"][..]), 3));
        store(&entries)
    }

    #[test]
    fn chain_expansion() {
        let s = chain();
        let (a, b, c) = (id(&s, "a"), id(&s, "b"), id(&s, "c"));
        let params = RetrievalParams {
            x: 1,
            y: 1,
            decay: 0.5,
            max_context_tokens: None,
        };
        let sg = build_query_subgraph(s.graph(), &[a], &params).unwrap();
        assert_eq!(sg.expansions[0].first, vec![(b, EdgeWeight(4))]);
        assert_eq!(
            sg.expansions[0].second,
            vec![SecondDegree {
                tag: c,
                score: 6.0,
                via: b
            }]
        );
        assert_eq!(sg.edge_pairs(), BTreeSet::from([(a, b), (b, c)]));
        let ctx = collect_context(s.index(), &sg, &params);
        assert_eq!(ctx.chunks.len(), 7);
        // (b,c) chunks carry strength 6, (a,b) chunks 4
        assert!(ctx.chunks[..3].iter().all(|c| c.score == 6.0));
        assert!(ctx.chunks[3..].iter().all(|c| c.score == 4.0));
    }

    #[test]
    fn isolated_query_tag() {
        let s = store(&[("d", &["alone"])]);
        let sg = build_query_subgraph(s.graph(), &[id(&s, "alone")], &RetrievalParams::default()).unwrap();
        assert_eq!(sg.nodes().len(), 1);
        assert!(sg.retrieved_edges.is_empty());
        assert!(collect_context(s.index(), &sg, &RetrievalParams::default()).is_empty());
    }

    #[test]
    fn unknown_tags_only() {
        let s = store(&[("d", &["a", "b"])]);
        assert!(matches!(
            build_query_subgraph(s.graph(), &[TagId(99)], &RetrievalParams::default()),
            Err(Error::NoKnownTags)
        ));
        assert!(matches!(
            build_query_subgraph(s.graph(), &[], &RetrievalParams::default()),
            Err(Error::NoKnownTags)
        ));
    }

    #[test]
    fn context_is_edge_provenance() {
        // c1:{a,b}, c2:{a,c}; only (a,b) retrieved
        let s = store(&[("c1", &["a", "b"]), ("c2", &["a", "c"])]);
        let (a, b) = (id(&s, "a"), id(&s, "b"));
        let sg = QuerySubgraph {
            query_tags: vec![a],
            expansions: Vec::new(),
            retrieved_edges: vec![RetrievedEdge {
                a,
                b,
                weight: EdgeWeight(1),
                strength: 1.0,
            }],
        };
        let ctx = collect_context(s.index(), &sg, &RetrievalParams::default());
        assert_eq!(ctx.chunk_ids(), vec![ChunkId::new("c1-0", 0)]);
        assert_eq!(ctx.chunks[0].provenance, vec![(a, b)]);
    }

    #[test]
    fn overlapping_edges_score_higher() {
        // chunk 0 holds {q, m, n}: supports (q,m), (q,n) and (m,n)
        let s = store(&[("x", &["q", "m", "n"]), ("y", &["q", "m"]), ("z", &["q", "n"])]);
        let q = id(&s, "q");
        let params = RetrievalParams {
            x: 2,
            y: 0,
            decay: 0.5,
            max_context_tokens: None,
        };
        let sg = build_query_subgraph(s.graph(), &[q], &params).unwrap();
        let ctx = collect_context(s.index(), &sg, &params);
        assert_eq!(ctx.chunks.len(), 3);
        assert_eq!(ctx.chunks[0].id.doc.as_ref(), "x-0");
        assert!(ctx.chunks[0].score > ctx.chunks[1].score);
        assert_eq!(ctx.chunks[0].provenance.len(), 3);
        let ids: BTreeSet<_> = ctx.chunk_ids().into_iter().collect();
        assert_eq!(ids.len(), 3);
    }

    #[test]
    fn query_pair_edges_survive_zero_budgets() {
        let s = store(&[("pf", &["pet", "fish"]), ("pc", &["pet", "cat"])]);
        let params = RetrievalParams::new(0, 0);
        let sg = build_query_subgraph(s.graph(), &[id(&s, "pet"), id(&s, "fish")], &params).unwrap();
        assert_eq!(sg.edge_pairs().len(), 1);
        let ctx = collect_context(s.index(), &sg, &params);
        assert_eq!(ctx.chunk_ids(), vec![ChunkId::new("pf-0", 0)]);
    }

    #[test]
    fn token_cap_truncates_in_rank_order() {
        let s = chain();
        let a = id(&s, "a");
        let uncapped = RetrievalParams::new(5, 3);
        let sg = build_query_subgraph(s.graph(), &[a], &uncapped).unwrap();
        let full = collect_context(s.index(), &sg, &uncapped);
        let per = u64::from(full.chunks[0].token_count);
        let capped = RetrievalParams {
            max_context_tokens: Some((per * 2 + per / 2) as usize),
            ..uncapped
        };
        let ctx = collect_context(s.index(), &sg, &capped);
        assert_eq!(ctx.chunks.len(), 2);
        assert_eq!(ctx.chunks[..], full.chunks[..2]);
        assert_eq!(ctx.total_tokens, per * 2);
    }

    #[test]
    fn invalid_decay_rejected() {
        let s = chain();
        for decay in [0.0, -1.0, 1.5, f64::NAN] {
            let p = RetrievalParams {
                decay,
                ..RetrievalParams::default()
            };
            assert!(matches!(
                build_query_subgraph(s.graph(), &[TagId(0)], &p),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn recall_end_to_end_and_partial_match() {
        let s = store(&[
            ("a", &["pet", "fish"]),
            ("b", &["pet", "cat"]),
            ("c", &["pet", "dog", "indoor"]),
            ("d", &["fish", "water"]),
        ]);
        let tagger = DeterministicTagger::with_english_stoplist(8).unwrap();
        let out = recall(&s, "What pet eats fish?", &RetrievalParams::default(), &tagger).unwrap();
        assert_eq!(out.query_tags, vec![Tag::from("fish"), Tag::from("pet")]);
        assert!(out.context.chunk_ids().contains(&ChunkId::new("a-0", 0)));
        assert_eq!(out.timing.traversal_external_calls, 0);

        let out = recall(&s, "Does a pet like an axolotl?", &RetrievalParams::default(), &tagger).unwrap();
        assert_eq!(out.query_tags, vec![Tag::from("pet")]);
        assert!(!out.context.is_empty());

        assert!(matches!(
            recall(&s, "axolotl habitats", &RetrievalParams::default(), &tagger),
            Err(Error::NoKnownTags)
        ));
    }
}
