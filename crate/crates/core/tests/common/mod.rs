//! Random corpora and brute-force reference implementations shared by the
//! integration tests and the acceptance run.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use bambookg::recall::{RecallOutcome, RetrievalParams};
use bambookg::{recall, ChunkId, DeterministicTagger, Error, MemoryStore, TagGraph, TagId};
use rand::seq::SliceRandom;
use rand::Rng;

/// One document: a list of chunks, each a list of tag surfaces.
#[derive(Debug, Clone)]
pub struct Doc {
    pub id: String,
    pub chunks: Vec<Vec<String>>,
}

pub fn tag_word(i: usize) -> String {
    format!("tag{i}")
}

/// `docs` documents over a pool of `pool` tags; each chunk carries 0 to
/// `max_tags` tags (repeats allowed, they collapse on ingest).
pub fn random_corpus(rng: &mut impl Rng, docs: usize, max_chunks: usize, pool: usize, max_tags: usize) -> Vec<Doc> {
    (0..docs)
        .map(|d| Doc {
            id: format!("doc{d}"),
            chunks: (0..rng.random_range(1..=max_chunks))
                .map(|_| {
                    (0..rng.random_range(0..=max_tags))
                        .map(|_| tag_word(rng.random_range(0..pool)))
                        .collect()
                })
                .collect(),
        })
        .collect()
}

pub fn chunk_text(tags: &[String]) -> String {
    if tags.is_empty() {
        "untagged".to_owned()
    } else {
        tags.join(" ")
    }
}

pub fn build_store(docs: &[Doc]) -> MemoryStore {
    let mut store = MemoryStore::new();
    for doc in docs {
        store
            .ingest_pretagged(&doc.id, doc.chunks.iter().map(|c| (chunk_text(c), c.clone())))
            .expect("generated corpora are valid");
    }
    store
}

pub fn shuffled(docs: &[Doc], rng: &mut impl Rng) -> Vec<Doc> {
    let mut out = docs.to_vec();
    out.shuffle(rng);
    out
}

/// Flattened `(chunk id, distinct tags)` view of a corpus.
pub fn chunk_tag_sets(docs: &[Doc]) -> Vec<(ChunkId, BTreeSet<String>)> {
    docs.iter()
        .flat_map(|d| {
            d.chunks
                .iter()
                .enumerate()
                .map(|(i, c)| (ChunkId::new(d.id.as_str(), i as u32), c.iter().cloned().collect()))
        })
        .collect()
}

/// Edge weights by counting, keyed by surface pair `(lo, hi)`.
pub fn oracle_weights(docs: &[Doc]) -> BTreeMap<(String, String), u32> {
    let mut w = BTreeMap::new();
    for (_, tags) in chunk_tag_sets(docs) {
        let tags: Vec<&String> = tags.iter().collect();
        for (i, a) in tags.iter().enumerate() {
            for b in &tags[i + 1..] {
                *w.entry(((*a).clone(), (*b).clone())).or_insert(0) += 1;
            }
        }
    }
    w
}

/// Chunks carrying both tags, by scanning every chunk.
pub fn oracle_chunks_for_edge(docs: &[Doc], a: &str, b: &str) -> Vec<ChunkId> {
    let mut out: Vec<ChunkId> = chunk_tag_sets(docs)
        .into_iter()
        .filter(|(_, t)| t.contains(a) && t.contains(b))
        .map(|(id, _)| id)
        .collect();
    out.sort();
    out
}

pub fn surface(g: &TagGraph, id: TagId) -> String {
    g.surface(id).expect("known tag").as_str().to_owned()
}

/// Store edges keyed by surface pair `(lo, hi)`.
pub fn store_weights(store: &MemoryStore) -> BTreeMap<(String, String), u32> {
    let g = store.graph();
    g.edges()
        .into_iter()
        .map(|(a, b, w)| {
            let (a, b) = (surface(g, a), surface(g, b));
            let key = if a < b { (a, b) } else { (b, a) };
            (key, w.0)
        })
        .collect()
}

/// Adjacency by scanning the edge list.
pub fn oracle_adjacency(g: &TagGraph) -> BTreeMap<TagId, Vec<(TagId, u32)>> {
    let mut adj: BTreeMap<TagId, Vec<(TagId, u32)>> = BTreeMap::new();
    for (a, b, w) in g.edges() {
        adj.entry(a).or_default().push((b, w.0));
        adj.entry(b).or_default().push((a, w.0));
    }
    adj
}

fn neighbors(adj: &BTreeMap<TagId, Vec<(TagId, u32)>>, t: TagId) -> Vec<(TagId, u32)> {
    adj.get(&t).cloned().unwrap_or_default()
}

/// Node and edge sets of a plain two-hop breadth-first search: the query
/// tags, their neighbors and their neighbors' neighbors; every edge touching
/// a first-hop node.
pub fn oracle_bfs(g: &TagGraph, query: &[TagId]) -> (BTreeSet<TagId>, BTreeSet<(TagId, TagId)>) {
    let adj = oracle_adjacency(g);
    let mut nodes: BTreeSet<TagId> = query.iter().copied().collect();
    let mut edges = BTreeSet::new();
    for &q in query {
        for (m, _) in neighbors(&adj, q) {
            nodes.insert(m);
            for (c, _) in neighbors(&adj, m) {
                nodes.insert(c);
                edges.insert((m.min(c), m.max(c)));
            }
        }
    }
    (nodes, edges)
}

/// Top `x` neighbors by sorting the full neighbor list under
/// (descending weight, ascending surface).
pub fn oracle_first(g: &TagGraph, seed: TagId, x: usize) -> Vec<(TagId, u32)> {
    let mut n = neighbors(&oracle_adjacency(g), seed);
    n.sort_by(|l, r| r.1.cmp(&l.1).then_with(|| surface(g, l.0).cmp(&surface(g, r.0))));
    n.truncate(x);
    n
}

/// Top `y` second-degree tags as `(tag, score, via)`, by scoring every
/// two-hop path through `first`.
pub fn oracle_second(g: &TagGraph, seed: TagId, first: &[TagId], y: usize, decay: f64) -> Vec<(TagId, f64, TagId)> {
    let adj = oracle_adjacency(g);
    let weight = |a: TagId, b: TagId| neighbors(&adj, a).into_iter().find(|(t, _)| *t == b).map(|(_, w)| w);
    let mut best: BTreeMap<TagId, (f64, TagId)> = BTreeMap::new();
    for &m in first {
        let Some(wq) = weight(seed, m) else { continue };
        for (c, wc) in neighbors(&adj, m) {
            if c == seed || first.contains(&c) {
                continue;
            }
            let score = f64::from(wq) * f64::from(wc) * decay;
            let e = best.entry(c).or_insert((score, m));
            if score > e.0 || (score == e.0 && surface(g, m) < surface(g, e.1)) {
                *e = (score, m);
            }
        }
    }
    let mut out: Vec<(TagId, f64, TagId)> = best.into_iter().map(|(c, (s, m))| (c, s, m)).collect();
    out.sort_by(|l, r| r.1.total_cmp(&l.1).then_with(|| surface(g, l.0).cmp(&surface(g, r.0))));
    out.truncate(y);
    out
}

/// Everything a recall produces, with tag ids replaced by surfaces so stores
/// built in different orders can be compared.
/// `(query tag, first-degree, second-degree as (tag, score, via))`.
pub type ExpansionView = (String, Vec<(String, u32)>, Vec<(String, f64, String)>);
/// `(chunk id, text, tokens, score, provenance)`.
pub type ChunkView = (String, String, u32, f64, Vec<(String, String)>);

#[derive(Debug, Clone, PartialEq)]
pub struct RecallView {
    pub query_tags: Vec<String>,
    pub expansions: Vec<ExpansionView>,
    pub edges: Vec<(String, String, u32, f64)>,
    pub chunks: Vec<ChunkView>,
    pub total_tokens: u64,
}

pub fn view(store: &MemoryStore, out: &RecallOutcome) -> RecallView {
    let s = |id: TagId| store.surface(id).to_owned();
    RecallView {
        query_tags: out.query_tags.iter().map(|t| t.as_str().to_owned()).collect(),
        expansions: out
            .subgraph
            .expansions
            .iter()
            .map(|e| {
                (
                    s(e.tag),
                    e.first.iter().map(|(t, w)| (s(*t), w.0)).collect(),
                    e.second.iter().map(|d| (s(d.tag), d.score, s(d.via))).collect(),
                )
            })
            .collect(),
        edges: out
            .subgraph
            .retrieved_edges
            .iter()
            .map(|e| (s(e.a), s(e.b), e.weight.0, e.strength))
            .collect(),
        chunks: out
            .context
            .chunks
            .iter()
            .map(|c| {
                (
                    c.id.to_string(),
                    c.text.to_string(),
                    c.token_count,
                    c.score,
                    c.provenance.iter().map(|(a, b)| (s(*a), s(*b))).collect(),
                )
            })
            .collect(),
        total_tokens: out.context.total_tokens,
    }
}

/// Recall through the deterministic tagger, reduced to a comparable value.
/// `None` stands for the no-known-tags outcome.
pub fn recall_view(store: &MemoryStore, query: &str, params: &RetrievalParams) -> Option<RecallView> {
    let tagger = DeterministicTagger::with_english_stoplist(8).expect("valid tagger");
    match recall(store, query, params, &tagger) {
        Ok(out) => Some(view(store, &out)),
        Err(Error::NoKnownTags) => None,
        Err(e) => panic!("recall failed: {e}"),
    }
}

/// `n` queries of one to three tag words from the pool, sometimes with an
/// unknown word mixed in.
pub fn random_queries(rng: &mut impl Rng, n: usize, pool: usize) -> Vec<String> {
    (0..n)
        .map(|_| {
            let mut words: Vec<String> = (0..rng.random_range(1..=3))
                .map(|_| tag_word(rng.random_range(0..pool)))
                .collect();
            if rng.random_bool(0.3) {
                words.push("unheardof".into());
            }
            words.join(" ")
        })
        .collect()
}
