//! JSON-lines interchange: one record per line, in the order header, tags
//! (by id), chunks (by doc, ordinal), edges (by a, b).

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{atomic_write, SnapshotChunk, SnapshotEdge, StoreSnapshot, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::store::{MemoryStore, StoreConfig};

pub const JSONL_FORMAT: &str = "bambookg-jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum JsonlRecord {
    Header {
        format: String,
        version: u32,
        config: StoreConfig,
    },
    Tag {
        id: u32,
        surface: String,
    },
    Chunk(SnapshotChunk),
    Edge(SnapshotEdge),
}

pub fn write_jsonl<W: Write + ?Sized>(store: &MemoryStore, out: &mut W) -> std::io::Result<()> {
    let snap = StoreSnapshot::from_store(store);
    let mut line = |rec: &JsonlRecord| -> std::io::Result<()> {
        serde_json::to_writer(&mut *out, rec)?;
        out.write_all(b"\n")
    };
    line(&JsonlRecord::Header {
        format: JSONL_FORMAT.into(),
        version: FORMAT_VERSION,
        config: snap.config,
    })?;
    for (id, surface) in snap.tags.into_iter().enumerate() {
        line(&JsonlRecord::Tag {
            id: id as u32,
            surface,
        })?;
    }
    for c in snap.chunks {
        line(&JsonlRecord::Chunk(c))?;
    }
    for e in snap.edges {
        line(&JsonlRecord::Edge(e))?;
    }
    Ok(())
}

pub fn read_jsonl(input: impl BufRead) -> Result<MemoryStore> {
    let mut header: Option<StoreConfig> = None;
    let mut tags = Vec::new();
    let mut chunks = Vec::new();
    let mut edges = Vec::new();

    for (n, line) in input.lines().enumerate() {
        let record = format!("line {}", n + 1);
        let line = line.map_err(|e| Error::parse(&record, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord = serde_json::from_str(&line).map_err(|e| Error::parse(&record, e))?;
        match rec {
            JsonlRecord::Header {
                format,
                version,
                config,
            } => {
                if n != 0 || header.is_some() {
                    return Err(Error::parse(record, "header must be the first line"));
                }
                if format != JSONL_FORMAT {
                    return Err(Error::parse(record, format!("unknown format {format:?}")));
                }
                if version != FORMAT_VERSION {
                    return Err(Error::VersionMismatch {
                        found: version,
                        expected: FORMAT_VERSION,
                    });
                }
                header = Some(config);
            }
            _ if header.is_none() => return Err(Error::parse(record, "missing header line")),
            JsonlRecord::Tag { id, surface } => {
                if id as usize != tags.len() {
                    return Err(Error::parse(record, format!("tag id {id} out of sequence")));
                }
                tags.push(surface);
            }
            JsonlRecord::Chunk(c) => chunks.push(c),
            JsonlRecord::Edge(e) => edges.push(e),
        }
    }

    let config = header.ok_or_else(|| Error::parse("line 1", "missing header line"))?;
    StoreSnapshot {
        format_version: FORMAT_VERSION,
        config,
        tags,
        chunks,
        edges,
    }
    .into_store()
}

pub fn export_jsonl(store: &MemoryStore, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_jsonl(store, &mut buf).map_err(|e| Error::io(path, e))?;
    atomic_write(path, &buf)
}

pub fn import_jsonl(path: impl AsRef<Path>) -> Result<MemoryStore> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(std::io::BufReader::new(file))
}
