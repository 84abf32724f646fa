//! Binary snapshot, format version 1. All integers little-endian.
//!
//! ```text
//! magic     8 bytes  "BAMBOOKG"
//! version   u32
//! section*  kind u8, length u64, payload[length]   (kinds 1..=4, in order)
//! checksum  u32      CRC-32 (IEEE) of every preceding byte
//! ```
//!
//! See `docs/snapshot-format.md` for the section payloads.

use std::path::Path;

use super::{atomic_write, SnapshotChunk, SnapshotEdge, StoreSnapshot};
use crate::error::{Error, Result};
use crate::store::{MemoryStore, StoreConfig};

pub const MAGIC: &[u8; 8] = b"BAMBOOKG";
pub const FORMAT_VERSION: u32 = 1;

const SECTION_CONFIG: u8 = 1;
const SECTION_TAGS: u8 = 2;
const SECTION_CHUNKS: u8 = 3;
const SECTION_EDGES: u8 = 4;

const HEADER_LEN: usize = 12;
const TRAILER_LEN: usize = 4;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn section(&mut self, kind: u8, body: impl FnOnce(&mut Writer)) {
        self.u8(kind);
        let len_at = self.buf.len();
        self.u64(0);
        body(self);
        let len = (self.buf.len() - len_at - 8) as u64;
        self.buf[len_at..len_at + 8].copy_from_slice(&len.to_le_bytes());
    }
}

pub fn encode_snapshot(store: &MemoryStore) -> Vec<u8> {
    let snap = StoreSnapshot::from_store(store);
    let mut w = Writer {
        buf: Vec::with_capacity(1024),
    };
    w.buf.extend_from_slice(MAGIC);
    w.u32(snap.format_version);

    w.section(SECTION_CONFIG, |w| {
        let json = serde_json::to_string(&snap.config).expect("config serializes");
        w.buf.extend_from_slice(json.as_bytes());
    });
    w.section(SECTION_TAGS, |w| {
        w.u32(snap.tags.len() as u32);
        for t in &snap.tags {
            w.str(t);
        }
    });
    w.section(SECTION_CHUNKS, |w| {
        w.u32(snap.chunks.len() as u32);
        for c in &snap.chunks {
            w.str(&c.doc);
            w.u32(c.ordinal);
            w.u32(c.token_count);
            w.u32(c.tags.len() as u32);
            for &t in &c.tags {
                w.u32(t);
            }
            w.str(&c.text);
        }
    });
    w.section(SECTION_EDGES, |w| {
        w.u64(snap.edges.len() as u64);
        for e in &snap.edges {
            w.u32(e.a);
            w.u32(e.b);
            w.u32(e.weight);
        }
    });

    let crc = crc32fast::hash(&w.buf);
    w.u32(crc);
    w.buf
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn truncated(what: &str) -> Error {
    Error::CorruptSnapshot(format!("truncated while reading {what}"))
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| truncated(what))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn str(&mut self, what: &str) -> Result<String> {
        let len = self.u32(what)? as usize;
        let bytes = self.take(len, what)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::CorruptSnapshot(format!("{what} is not valid UTF-8")))
    }

    /// Reads a section header of the expected kind and returns a reader over
    /// exactly its payload.
    fn section(&mut self, kind: u8, name: &str) -> Result<Reader<'a>> {
        let found = self.u8(name)?;
        if found != kind {
            return Err(Error::CorruptSnapshot(format!(
                "expected {name} section (kind {kind}), found kind {found}"
            )));
        }
        let len = usize::try_from(self.u64(name)?).map_err(|_| truncated(name))?;
        Ok(Reader {
            buf: self.take(len, name)?,
            pos: 0,
        })
    }

    fn finish(&self, name: &str) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(Error::CorruptSnapshot(format!("trailing bytes in {name} section")))
        }
    }
}

/// Guards allocation sizes taken from the file against the bytes remaining.
fn count(r: &Reader<'_>, n: u64, min_record: usize, what: &str) -> Result<usize> {
    let n = usize::try_from(n).map_err(|_| truncated(what))?;
    if n.saturating_mul(min_record) > r.buf.len() - r.pos {
        return Err(truncated(what));
    }
    Ok(n)
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<MemoryStore> {
    if bytes.len() < HEADER_LEN + TRAILER_LEN {
        return Err(Error::CorruptSnapshot(format!("file too short ({} bytes)", bytes.len())));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - TRAILER_LEN);
    let stored = u32::from_le_bytes(trailer.try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err(Error::CorruptSnapshot("checksum mismatch".into()));
    }
    if &body[..8] != MAGIC {
        return Err(Error::CorruptSnapshot("bad magic".into()));
    }

    let mut r = Reader { buf: body, pos: 8 };
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }

    let cfg = r.section(SECTION_CONFIG, "config")?;
    let config: StoreConfig = serde_json::from_slice(cfg.buf)
        .map_err(|e| Error::CorruptSnapshot(format!("config section: {e}")))?;

    let mut s = r.section(SECTION_TAGS, "tags")?;
    let n = s.u32("tag count")?;
    let n = count(&s, n.into(), 4, "tags")?;
    let mut tags = Vec::with_capacity(n);
    for _ in 0..n {
        tags.push(s.str("tag surface")?);
    }
    s.finish("tags")?;

    let mut s = r.section(SECTION_CHUNKS, "chunks")?;
    let n = s.u32("chunk count")?;
    let n = count(&s, n.into(), 20, "chunks")?;
    let mut chunks = Vec::with_capacity(n);
    for _ in 0..n {
        let doc = s.str("chunk doc")?;
        let ordinal = s.u32("chunk ordinal")?;
        let token_count = s.u32("chunk token count")?;
        let k = s.u32("chunk tag count")?;
        let k = count(&s, k.into(), 4, "chunk tags")?;
        let mut ctags = Vec::with_capacity(k);
        for _ in 0..k {
            ctags.push(s.u32("chunk tag")?);
        }
        let text = s.str("chunk text")?;
        chunks.push(SnapshotChunk {
            doc,
            ordinal,
            token_count,
            tags: ctags,
            text,
        });
    }
    s.finish("chunks")?;

    let mut s = r.section(SECTION_EDGES, "edges")?;
    let n = s.u64("edge count")?;
    let n = count(&s, n, 12, "edges")?;
    let mut edges = Vec::with_capacity(n);
    for _ in 0..n {
        edges.push(SnapshotEdge {
            a: s.u32("edge a")?,
            b: s.u32("edge b")?,
            weight: s.u32("edge weight")?,
        });
    }
    s.finish("edges")?;
    r.finish("file")?;

    StoreSnapshot {
        format_version: version,
        config,
        tags,
        chunks,
        edges,
    }
    .into_store()
}

/// Atomically writes the snapshot; returns the number of bytes written.
pub fn save_snapshot(store: &MemoryStore, path: impl AsRef<Path>) -> Result<u64> {
    let bytes = encode_snapshot(store);
    atomic_write(path.as_ref(), &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<MemoryStore> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes)
}
