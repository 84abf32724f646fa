//! The two graphs behind a store: the frequency-weighted tag co-occurrence
//! graph and the tag → chunk index that supplies edge provenance.

mod chunk_index;
mod tag;
mod tag_graph;

pub use chunk_index::{Chunk, ChunkId, ChunkIndex};
pub use tag::{normalize, Tag, TagId};
pub use tag_graph::{EdgeDelta, EdgeWeight, SecondDegree, TagGraph};

pub(crate) use tag_graph::EdgeKey;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub total_weight: u64,
    pub chunks: usize,
    pub max_degree: usize,
}

pub fn graph_stats(graph: &TagGraph, index: &ChunkIndex) -> GraphStats {
    GraphStats {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        total_weight: graph.total_weight(),
        chunks: index.len(),
        max_degree: graph.max_degree(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stats_are_zero() {
        assert_eq!(graph_stats(&TagGraph::new(), &ChunkIndex::new()), GraphStats::default());
    }

    #[test]
    fn single_pair_stats() {
        let mut g = TagGraph::new();
        let mut idx = ChunkIndex::new();
        let tags = vec![g.intern_tag("a").unwrap(), g.intern_tag("b").unwrap()];
        let id = ChunkId::new("doc", 0);
        g.record_cooccurrence(&tags, &id).unwrap();
        idx.insert(Chunk {
            id,
            text: "a b".into(),
            token_count: 2,
            tags,
        })
        .unwrap();
        assert_eq!(
            graph_stats(&g, &idx),
            GraphStats {
                nodes: 2,
                edges: 1,
                total_weight: 1,
                chunks: 1,
                max_degree: 1
            }
        );
    }
}
