//! Fixed-size token chunking with forward snapping to sentence ends.
//!
//! A token is a maximal run of non-whitespace characters. Chunks never
//! overlap; their byte ranges cover every token of the document in order.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_CHUNK_TOKENS: usize = 200;
pub const MAX_CHUNK_TOKENS: usize = 1200;
pub const DEFAULT_CHUNK_TOKENS: usize = 300;
/// How far past the nominal boundary a chunk may extend to end on a sentence.
pub const SNAP_WINDOW: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChunkingConfig {
    pub chunk_tokens: usize,
}

impl Default for ChunkingConfig {
    fn default() -> Self {
        ChunkingConfig {
            chunk_tokens: DEFAULT_CHUNK_TOKENS,
        }
    }
}

impl ChunkingConfig {
    pub fn new(chunk_tokens: usize) -> Result<Self> {
        let cfg = ChunkingConfig { chunk_tokens };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_CHUNK_TOKENS..=MAX_CHUNK_TOKENS).contains(&self.chunk_tokens) {
            return Err(Error::InvalidConfig(format!(
                "chunk_tokens must be within {MIN_CHUNK_TOKENS}..={MAX_CHUNK_TOKENS}, got {}",
                self.chunk_tokens
            )));
        }
        Ok(())
    }
}

/// A chunk before tagging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DraftChunk {
    pub ordinal: u32,
    pub text: String,
    pub token_count: u32,
    /// Byte range of `text` within the source document.
    pub span: Range<usize>,
}

pub fn count_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Byte spans of every whitespace-delimited token.
fn token_spans(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push(s..i);
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push(s..text.len());
    }
    spans
}

/// A token closes a sentence when it ends in terminal punctuation (optionally
/// followed by closing quotes or brackets) or when a newline follows it.
fn ends_sentence(text: &str, span: &Range<usize>) -> bool {
    let token = &text[span.clone()];
    let trimmed = token.trim_end_matches(['"', '\'', ')', ']', '\u{201d}', '\u{2019}']);
    if trimmed.ends_with(['.', '!', '?']) {
        return true;
    }
    text[span.end..]
        .chars()
        .take_while(|c| c.is_whitespace())
        .any(|c| c == '\n')
}

pub fn chunk_document(doc_text: &str, doc_id: &str, cfg: &ChunkingConfig) -> Result<Vec<DraftChunk>> {
    cfg.validate()?;
    let spans = token_spans(doc_text);
    if spans.is_empty() {
        return Err(Error::EmptyDocument(doc_id.to_owned()));
    }

    let mut chunks = Vec::new();
    let mut start = 0;
    while start < spans.len() {
        let mut end = (start + cfg.chunk_tokens).min(spans.len());
        if end < spans.len() && !ends_sentence(doc_text, &spans[end - 1]) {
            let limit = (end + SNAP_WINDOW).min(spans.len());
            if let Some(k) = (end..limit).find(|&k| ends_sentence(doc_text, &spans[k])) {
                end = k + 1;
            }
        }
        let span = spans[start].start..spans[end - 1].end;
        chunks.push(DraftChunk {
            ordinal: chunks.len() as u32,
            text: doc_text[span.clone()].to_owned(),
            token_count: (end - start) as u32,
            span,
        });
        start = end;
    }
    Ok(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    fn cfg(n: usize) -> ChunkingConfig {
        ChunkingConfig::new(n).unwrap()
    }

    #[test]
    fn counts_whitespace_tokens() {
        assert_eq!(count_tokens(""), 0);
        assert_eq!(count_tokens("a b  c"), 3);
        assert_eq!(count_tokens(&words(500)), 500);
    }

    #[test]
    fn config_band_is_enforced() {
        assert!(ChunkingConfig::new(199).is_err());
        assert!(ChunkingConfig::new(1201).is_err());
        assert!(ChunkingConfig::new(200).is_ok());
        assert!(ChunkingConfig::new(1200).is_ok());
        assert_eq!(ChunkingConfig::default().chunk_tokens, 300);
    }

    #[test]
    fn exact_division() {
        let chunks = chunk_document(&words(400), "d", &cfg(200)).unwrap();
        let sizes: Vec<u32> = chunks.iter().map(|c| c.token_count).collect();
        assert_eq!(sizes, [200, 200]);
    }

    #[test]
    fn remainder_chunk() {
        let doc = words(450);
        let chunks = chunk_document(&doc, "d", &cfg(200)).unwrap();
        let sizes: Vec<u32> = chunks.iter().map(|c| c.token_count).collect();
        assert_eq!(sizes, [200, 200, 50]);
        assert!(chunks[1].text.starts_with("w200 "));
        assert!(chunks[2].text.starts_with("w400 ") && chunks[2].text.ends_with("w449"));
        assert_eq!(chunks.iter().map(|c| c.ordinal).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn short_document_is_one_chunk() {
        let chunks = chunk_document(&words(100), "d", &cfg(200)).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 100);
    }

    #[test]
    fn whitespace_document_is_rejected() {
        assert!(matches!(
            chunk_document(" \n\t ", "d", &cfg(200)),
            Err(Error::EmptyDocument(_))
        ));
    }

    #[test]
    fn snaps_forward_to_sentence_end() {
        // sentence ends at token index 209 (the 210th token)
        let mut toks: Vec<String> = (0..300).map(|i| format!("w{i}")).collect();
        toks[209].push('.');
        let chunks = chunk_document(&toks.join(" "), "d", &cfg(200)).unwrap();
        assert_eq!(chunks[0].token_count, 210);
        assert!(chunks[0].text.ends_with("w209."));
    }

    #[test]
    fn no_snap_beyond_window() {
        let mut toks: Vec<String> = (0..300).map(|i| format!("w{i}")).collect();
        toks[200 + SNAP_WINDOW].push('.');
        let chunks = chunk_document(&toks.join(" "), "d", &cfg(200)).unwrap();
        assert_eq!(chunks[0].token_count, 200);
    }

    #[test]
    fn newline_counts_as_sentence_end() {
        let mut doc = words(205);
        let cut = doc.find("w203 ").unwrap() + 4;
        doc.replace_range(cut..cut + 1, "\n");
        let chunks = chunk_document(&doc, "d", &cfg(200)).unwrap();
        assert_eq!(chunks[0].token_count, 204);
    }

    #[test]
    fn boundary_already_on_sentence_end_does_not_extend() {
        let mut toks: Vec<String> = (0..300).map(|i| format!("w{i}")).collect();
        toks[199].push('!');
        toks[210].push('.');
        let chunks = chunk_document(&toks.join(" "), "d", &cfg(200)).unwrap();
        assert_eq!(chunks[0].token_count, 200);
    }

    fn arb_doc() -> impl Strategy<Value = String> {
        let word = prop_oneof![
            4 => "[a-z]{1,8}",
            1 => "[a-z]{1,6}[.!?]",
        ];
        let sep = prop_oneof![8 => Just(" "), 1 => Just("  "), 1 => Just("\n"), 1 => Just(" \t")];
        proptest::collection::vec((word, sep), 1..1500).prop_map(|parts| {
            let mut s = String::from(" ");
            for (w, sep) in parts {
                s.push_str(&w);
                s.push_str(sep);
            }
            s
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chunks_tile_the_document(doc in arb_doc(), size in 200usize..=400) {
            let chunks = chunk_document(&doc, "d", &cfg(size)).unwrap();

            // reassembly with the gaps restored reproduces the source
            let mut rebuilt = String::new();
            let mut cursor = 0;
            for c in &chunks {
                let gap = &doc[cursor..c.span.start];
                prop_assert!(gap.chars().all(char::is_whitespace));
                rebuilt.push_str(gap);
                prop_assert_eq!(&doc[c.span.clone()], c.text.as_str());
                rebuilt.push_str(&c.text);
                cursor = c.span.end;
            }
            let tail = &doc[cursor..];
            prop_assert!(tail.chars().all(char::is_whitespace));
            rebuilt.push_str(tail);
            prop_assert_eq!(&rebuilt, &doc);

            let total: usize = chunks.iter().map(|c| c.token_count as usize).sum();
            prop_assert_eq!(total, count_tokens(&doc));
            for (i, c) in chunks.iter().enumerate() {
                prop_assert_eq!(c.ordinal as usize, i);
                prop_assert_eq!(c.token_count as usize, count_tokens(&c.text));
                prop_assert!(c.token_count as usize <= size + SNAP_WINDOW);
                if i + 1 < chunks.len() {
                    prop_assert!(c.token_count as usize >= size);
                }
            }
        }
    }
}
