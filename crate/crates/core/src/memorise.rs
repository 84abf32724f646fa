//! Document → chunks → tags → merged store.
//!
//! Ingest is staged: every chunk of a document is tagged before anything is
//! merged, so a tagger failure leaves the store untouched.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chunker::{chunk_document, ChunkingConfig};
use crate::error::{Error, Result};
use crate::graph::{Chunk, ChunkId, Tag};
use crate::store::MemoryStore;
use crate::tagger::Tagger;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub doc_id: String,
    pub chunks_created: usize,
    pub tags_created: usize,
    pub edges_created: usize,
    pub edges_reinforced: usize,
}

/// A chunk that has been tagged but not merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedChunk {
    pub text: String,
    pub token_count: u32,
    pub tags: Vec<Tag>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedDocument {
    pub doc_id: String,
    pub chunks: Vec<TaggedChunk>,
}

/// Chunks and tags one document without touching any store. Exactly one
/// tagger call is made per chunk.
pub fn stage_document(
    doc_text: &str,
    doc_id: &str,
    chunk_cfg: &ChunkingConfig,
    tagger: &dyn Tagger,
) -> Result<StagedDocument> {
    let drafts = chunk_document(doc_text, doc_id, chunk_cfg)?;
    let mut chunks = Vec::with_capacity(drafts.len());
    for draft in drafts {
        let tags = match tagger.tag_chunk(&draft.text) {
            Ok(tags) => tags,
            Err(Error::NoTagsFound) => Vec::new(),
            Err(e) => return Err(e),
        };
        chunks.push(TaggedChunk {
            text: draft.text,
            token_count: draft.token_count,
            tags,
        });
    }
    Ok(StagedDocument {
        doc_id: doc_id.to_owned(),
        chunks,
    })
}

impl MemoryStore {
    /// Merges a staged document. Fails only on a duplicate document id, in
    /// which case nothing changes.
    pub fn merge(&mut self, staged: StagedDocument) -> Result<IngestReport> {
        if self.contains_document(&staged.doc_id) {
            return Err(Error::DuplicateDocument(staged.doc_id));
        }
        let mut report = IngestReport {
            doc_id: staged.doc_id.clone(),
            ..IngestReport::default()
        };
        let doc: std::sync::Arc<str> = staged.doc_id.into();
        for (ordinal, chunk) in staged.chunks.into_iter().enumerate() {
            let mut ids = Vec::with_capacity(chunk.tags.len());
            for tag in &chunk.tags {
                let (id, created) = self.intern(tag);
                report.tags_created += usize::from(created);
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
            let id = ChunkId::new(doc.clone(), ordinal as u32);
            let (graph, index) = self.parts_mut();
            let deltas = graph
                .record_cooccurrence(&ids, &id)
                .expect("fresh document yields fresh chunk ids");
            for d in &deltas {
                if d.created() {
                    report.edges_created += 1;
                } else {
                    report.edges_reinforced += 1;
                }
            }
            index
                .insert(Chunk {
                    id,
                    text: chunk.text.into(),
                    token_count: chunk.token_count,
                    tags: ids,
                })
                .expect("fresh document yields fresh chunk ids");
            report.chunks_created += 1;
        }
        Ok(report)
    }

    /// Ingests chunks whose tags are already known, bypassing chunking and
    /// tagging. Each entry becomes one chunk, in order.
    pub fn ingest_pretagged<S: AsRef<str>>(
        &mut self,
        doc_id: &str,
        chunks: impl IntoIterator<Item = (String, Vec<S>)>,
    ) -> Result<IngestReport> {
        let mut staged = Vec::new();
        for (text, raw_tags) in chunks {
            let mut tags = Vec::new();
            for raw in raw_tags {
                let tag = Tag::new(raw.as_ref())?;
                if !tags.contains(&tag) {
                    tags.push(tag);
                }
            }
            staged.push(TaggedChunk {
                token_count: crate::chunker::count_tokens(&text) as u32,
                text,
                tags,
            });
        }
        self.merge(StagedDocument {
            doc_id: doc_id.to_owned(),
            chunks: staged,
        })
    }
}

/// Chunk, tag and merge one document atomically.
pub fn ingest_document(
    store: &mut MemoryStore,
    doc_text: &str,
    doc_id: &str,
    chunk_cfg: &ChunkingConfig,
    tagger: &dyn Tagger,
) -> Result<IngestReport> {
    if store.contains_document(doc_id) {
        return Err(Error::DuplicateDocument(doc_id.to_owned()));
    }
    let staged = stage_document(doc_text, doc_id, chunk_cfg, tagger)?;
    store.merge(staged)
}

/// A corpus ingest that stopped at a failing document. Documents before it
/// were merged and are listed in `completed`.
#[derive(Debug, thiserror::Error)]
#[error("ingest stopped at document {doc_id:?} after {} completed: {source}", completed.len())]
pub struct CorpusError {
    pub completed: Vec<IngestReport>,
    pub doc_id: String,
    #[source]
    pub source: Error,
}

/// Ingests documents in order. Chunking and tagging run in parallel; merging
/// is sequential, so the result equals calling [`ingest_document`] on each
/// document in turn.
pub fn ingest_corpus(
    store: &mut MemoryStore,
    documents: &[Document],
    chunk_cfg: &ChunkingConfig,
    tagger: &dyn Tagger,
) -> Result<Vec<IngestReport>, CorpusError> {
    let mut seen = HashSet::new();
    for doc in documents {
        if !seen.insert(doc.id.as_str()) {
            return Err(CorpusError {
                completed: Vec::new(),
                doc_id: doc.id.clone(),
                source: Error::DuplicateDocument(doc.id.clone()),
            });
        }
    }

    let staged: Vec<Result<StagedDocument>> = documents
        .par_iter()
        .map(|doc| {
            if store.contains_document(&doc.id) {
                return Err(Error::DuplicateDocument(doc.id.clone()));
            }
            stage_document(&doc.text, &doc.id, chunk_cfg, tagger)
        })
        .collect();

    let mut completed = Vec::with_capacity(documents.len());
    for (doc, staged) in documents.iter().zip(staged) {
        match staged.and_then(|s| store.merge(s)) {
            Ok(report) => completed.push(report),
            Err(source) => {
                return Err(CorpusError {
                    completed,
                    doc_id: doc.id.clone(),
                    source,
                })
            }
        }
    }
    Ok(completed)
}
