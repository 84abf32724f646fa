//! Associative-memory knowledge graph.
//!
//! Documents are chunked and each chunk is tagged with a short list of
//! salient terms. Two graphs are maintained from that: an undirected tag
//! co-occurrence graph whose edge weights count the chunks a pair shared, and
//! a tag → chunk index. Recall tags a query against the known vocabulary,
//! expands each query tag to its strongest first- and second-degree
//! neighbors, and returns the chunks behind the edges it walked. The recall
//! traversal makes no model or network calls.
//!
//! ```
//! use bambookg::{recall, DeterministicTagger, MemoryStore, RetrievalParams};
//!
//! let mut store = MemoryStore::new();
//! store
//!     .ingest_pretagged("notes", [
//!         ("Cats are popular pets.".to_string(), vec!["cat", "pet"]),
//!         ("Goldfish are pets that eat flakes.".to_string(), vec!["fish", "pet"]),
//!     ])
//!     .unwrap();
//!
//! let tagger = DeterministicTagger::with_english_stoplist(8).unwrap();
//! let out = recall(&store, "What do fish eat?", &RetrievalParams::default(), &tagger).unwrap();
//! assert_eq!(&*out.context.chunks[0].text, "Goldfish are pets that eat flakes.");
//! // The cat chunk comes second, reached through "pet" one hop further out.
//! assert_eq!(out.context.chunks.len(), 2);
//! ```
//!
//! Runnable walkthroughs live in `examples/`.

pub mod bench;
pub mod chunker;
pub mod cli;
mod error;
pub mod graph;
pub mod instrument;
pub mod memorise;
pub mod persist;
pub mod recall;
mod store;
pub mod tagger;

pub use chunker::{chunk_document, count_tokens, ChunkingConfig};
pub use error::{Error, Result};
pub use graph::{graph_stats, Chunk, ChunkId, ChunkIndex, EdgeWeight, GraphStats, Tag, TagGraph, TagId};
pub use memorise::{ingest_corpus, ingest_document, Document, IngestReport};
pub use persist::{export_jsonl, import_jsonl, load_snapshot, save_snapshot};
pub use recall::{build_query_subgraph, collect_context, recall, QuerySubgraph, RecallContext, RetrievalParams};
pub use store::{MemoryStore, StoreConfig};
pub use tagger::{DeterministicTagger, LlmTagger, Tagger, TaggerConfig, TaggerMode, Vocabulary};
