use std::collections::HashMap;
use std::sync::Arc;

use super::{tokenize, Stoplist, Tagger, Vocabulary};
use crate::error::{Error, Result};
use crate::graph::Tag;

/// Tokens shorter than this (in chars) are never tags on their own.
const MIN_TOKEN_CHARS: usize = 2;

/// Offline stand-in for an LLM tagger: stoplist-filtered term frequency.
///
/// Unconstrained, every surviving token is a candidate. Under a vocabulary
/// constraint the text is scanned left to right for the longest vocabulary
/// phrase starting at each position, so "indoor pet" wins over "pet" when
/// both are known. Candidates are ranked by descending count, then
/// ascending surface, and the first `max_tags` are returned in rank order.
#[derive(Debug, Clone)]
pub struct DeterministicTagger {
    max_tags: usize,
    stoplist: Arc<Stoplist>,
}

impl DeterministicTagger {
    pub fn new(max_tags: usize, stoplist: Arc<Stoplist>) -> Result<Self> {
        if max_tags == 0 {
            return Err(Error::InvalidConfig("max_tags must be at least 1".into()));
        }
        Ok(DeterministicTagger { max_tags, stoplist })
    }

    pub fn with_english_stoplist(max_tags: usize) -> Result<Self> {
        Self::new(max_tags, Stoplist::english())
    }

    fn keeps_single(&self, token: &str) -> bool {
        token.chars().count() >= MIN_TOKEN_CHARS && !self.stoplist.contains(token)
    }

    fn free_terms(&self, tokens: &[String]) -> HashMap<Tag, usize> {
        let mut counts: HashMap<Tag, usize> = HashMap::new();
        for tok in tokens.iter().filter(|t| self.keeps_single(t)) {
            if let Ok(tag) = Tag::new(tok) {
                *counts.entry(tag).or_default() += 1;
            }
        }
        counts
    }

    fn vocabulary_terms(&self, tokens: &[String], vocab: &Vocabulary) -> HashMap<Tag, usize> {
        let mut counts: HashMap<Tag, usize> = HashMap::new();
        let longest = vocab.max_phrase_tokens();
        let mut i = 0;
        while i < tokens.len() {
            let mut advanced = false;
            for len in (1..=longest.min(tokens.len() - i)).rev() {
                let window = &tokens[i..i + len];
                if len == 1 && !self.keeps_single(&window[0]) {
                    continue;
                }
                if let Some(tag) = vocab.phrase(window) {
                    *counts.entry(tag.clone()).or_default() += 1;
                    i += len;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                i += 1;
            }
        }
        counts
    }

    fn rank(&self, counts: HashMap<Tag, usize>) -> Vec<Tag> {
        let mut ranked: Vec<(Tag, usize)> = counts.into_iter().collect();
        ranked.sort_by(|(ta, ca), (tb, cb)| cb.cmp(ca).then_with(|| ta.cmp(tb)));
        ranked.truncate(self.max_tags);
        ranked.into_iter().map(|(t, _)| t).collect()
    }
}

impl Tagger for DeterministicTagger {
    fn tag(&self, text: &str, constraint: Option<&Vocabulary>) -> Result<Vec<Tag>> {
        let tokens = tokenize(text);
        let counts = match constraint {
            Some(vocab) if vocab.is_empty() => return Err(Error::NoTagsFound),
            Some(vocab) => self.vocabulary_terms(&tokens, vocab),
            None => self.free_terms(&tokens),
        };
        let tags = self.rank(counts);
        if tags.is_empty() {
            Err(Error::NoTagsFound)
        } else {
            Ok(tags)
        }
    }
}
