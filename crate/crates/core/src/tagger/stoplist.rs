use std::collections::HashSet;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

const EMBEDDED: &str = include_str!("../../assets/stoplist_en.txt");

/// Words the deterministic tagger never emits as single-token tags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist {
    words: HashSet<String>,
}

impl Stoplist {
    /// Parses one word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(crate::graph::normalize)
            .collect();
        Stoplist { words }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        Stoplist {
            words: words.into_iter().map(crate::graph::normalize).collect(),
        }
    }

    /// The English list shipped in `assets/stoplist_en.txt`.
    pub fn english() -> Arc<Stoplist> {
        static CELL: OnceLock<Arc<Stoplist>> = OnceLock::new();
        CELL.get_or_init(|| Arc::new(Stoplist::parse(EMBEDDED))).clone()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}
