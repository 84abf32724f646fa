use std::collections::{HashMap, HashSet};

use super::tokenize;
use crate::graph::Tag;

/// The set of tags a tagger may emit, indexed by token phrase so that
/// multi-word tags can be matched against running text.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    members: HashSet<Tag>,
    phrases: HashMap<String, Tag>,
    max_phrase_tokens: usize,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tags<I, T>(tags: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<Tag>,
    {
        let mut v = Self::new();
        for t in tags {
            v.insert(t.into());
        }
        v
    }

    /// Builds a vocabulary from raw strings, skipping any that normalize to
    /// nothing.
    pub fn from_surfaces<'a>(surfaces: impl IntoIterator<Item = &'a str>) -> Self {
        Self::from_tags(surfaces.into_iter().filter_map(|s| Tag::new(s).ok()))
    }

    pub fn insert(&mut self, tag: Tag) {
        if self.members.contains(&tag) {
            return;
        }
        let tokens = tokenize(tag.as_str());
        if !tokens.is_empty() {
            let key = tokens.join(" ");
            // first tag to claim a phrase keeps it
            if !self.phrases.contains_key(&key) {
                self.max_phrase_tokens = self.max_phrase_tokens.max(tokens.len());
                self.phrases.insert(key, tag.clone());
            }
        }
        self.members.insert(tag);
    }

    pub fn contains(&self, tag: &Tag) -> bool {
        self.members.contains(tag)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tag> + '_ {
        self.members.iter()
    }

    pub(crate) fn max_phrase_tokens(&self) -> usize {
        self.max_phrase_tokens
    }

    pub(crate) fn phrase(&self, tokens: &[String]) -> Option<&Tag> {
        if tokens.len() == 1 {
            return self.phrases.get(&tokens[0]);
        }
        self.phrases.get(&tokens.join(" "))
    }
}

impl From<&str> for Tag {
    /// Panics on input that normalizes to nothing; for literals in tests and
    /// examples.
    fn from(s: &str) -> Self {
        Tag::new(s).expect("tag literal must be nonempty")
    }
}
