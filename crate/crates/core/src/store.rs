use serde::{Deserialize, Serialize};

use crate::chunker::ChunkingConfig;
use crate::error::Result;
use crate::graph::{graph_stats, Chunk, ChunkIndex, GraphStats, Tag, TagGraph, TagId};
use crate::recall::RetrievalParams;
use crate::tagger::{TaggerConfig, Vocabulary};

/// Settings a store was built with; persisted alongside the graphs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoreConfig {
    pub chunking: ChunkingConfig,
    pub tagger: TaggerConfig,
    pub retrieval: RetrievalParams,
}

impl StoreConfig {
    pub fn validate(&self) -> Result<()> {
        self.chunking.validate()?;
        self.tagger.validate()?;
        self.retrieval.validate()
    }
}

/// Both knowledge graphs plus the query vocabulary derived from them.
///
/// Reads take `&self` and may run concurrently; ingest takes `&mut self`.
/// Wrap in a `RwLock` to share a store between a writer and readers.
#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    graph: TagGraph,
    index: ChunkIndex,
    vocabulary: Vocabulary,
    config: StoreConfig,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_config(config: StoreConfig) -> Self {
        MemoryStore {
            config,
            ..Self::default()
        }
    }

    pub fn graph(&self) -> &TagGraph {
        &self.graph
    }

    pub fn index(&self) -> &ChunkIndex {
        &self.index
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    pub fn set_config(&mut self, config: StoreConfig) {
        self.config = config;
    }

    pub fn stats(&self) -> GraphStats {
        graph_stats(&self.graph, &self.index)
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty() && self.graph.node_count() == 0
    }

    pub fn contains_document(&self, doc: &str) -> bool {
        self.index.contains_document(doc)
    }

    pub(crate) fn intern(&mut self, tag: &Tag) -> (TagId, bool) {
        let before = self.graph.node_count();
        let id = self.graph.intern(tag);
        let created = self.graph.node_count() > before;
        if created {
            self.vocabulary.insert(tag.clone());
        }
        (id, created)
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut TagGraph, &mut ChunkIndex) {
        (&mut self.graph, &mut self.index)
    }

    /// Reassembles a store from already-validated parts.
    pub(crate) fn from_parts(graph: TagGraph, index: ChunkIndex, config: StoreConfig) -> Self {
        let vocabulary = Vocabulary::from_tags(graph.tags().map(|(_, t)| t.clone()));
        MemoryStore {
            graph,
            index,
            vocabulary,
            config,
        }
    }

    /// Surface of a tag id; panics on ids from another store.
    pub fn surface(&self, id: TagId) -> &str {
        self.graph
            .surface(id)
            .map(Tag::as_str)
            .expect("tag id belongs to this store")
    }

    pub fn chunk(&self, id: &crate::graph::ChunkId) -> Option<&Chunk> {
        self.index.get(id)
    }
}
