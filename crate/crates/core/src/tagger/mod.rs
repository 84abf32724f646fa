//! Tag extraction: a pluggable [`Tagger`] interface with a deterministic
//! term-frequency implementation and a chat-completions client.

mod deterministic;
mod llm;
mod stoplist;
mod vocabulary;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

pub use deterministic::DeterministicTagger;
pub use llm::{chunk_prompt, parse_completion, query_prompt, LlmTagger, LlmTaggerEndpoint, API_KEY_ENV, PROMPT_VERSION};
pub use stoplist::Stoplist;
pub use vocabulary::Vocabulary;

use crate::error::{Error, Result};
use crate::graph::Tag;

pub const DEFAULT_MAX_TAGS: usize = 8;

pub trait Tagger: Send + Sync {
    /// Returns at most `max_tags` distinct normalized tags. Under a
    /// constraint every returned tag is a member of it. An empty result is
    /// reported as [`Error::NoTagsFound`].
    fn tag(&self, text: &str, constraint: Option<&Vocabulary>) -> Result<Vec<Tag>>;

    fn tag_chunk(&self, text: &str) -> Result<Vec<Tag>> {
        self.tag(text, None)
    }

    fn tag_query(&self, query: &str, vocabulary: &Vocabulary) -> Result<Vec<Tag>> {
        self.tag(query, Some(vocabulary))
    }

    /// Whether calls leave the process.
    fn is_external(&self) -> bool {
        false
    }
}

impl<T: Tagger + ?Sized> Tagger for Arc<T> {
    fn tag(&self, text: &str, constraint: Option<&Vocabulary>) -> Result<Vec<Tag>> {
        (**self).tag(text, constraint)
    }

    fn is_external(&self) -> bool {
        (**self).is_external()
    }
}

impl<T: Tagger + ?Sized> Tagger for Box<T> {
    fn tag(&self, text: &str, constraint: Option<&Vocabulary>) -> Result<Vec<Tag>> {
        (**self).tag(text, constraint)
    }

    fn is_external(&self) -> bool {
        (**self).is_external()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaggerMode {
    #[default]
    #[serde(rename = "det")]
    Deterministic,
    #[serde(rename = "llm")]
    Llm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaggerConfig {
    pub max_tags: usize,
    pub mode: TaggerMode,
    /// Replaces the embedded English stoplist (deterministic mode).
    pub stoplist_path: Option<PathBuf>,
    pub llm: Option<LlmTaggerEndpoint>,
    #[serde(skip)]
    pub vocabulary_constraint: Option<Vocabulary>,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            max_tags: DEFAULT_MAX_TAGS,
            mode: TaggerMode::Deterministic,
            stoplist_path: None,
            llm: None,
            vocabulary_constraint: None,
        }
    }
}

impl TaggerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_tags == 0 {
            return Err(Error::InvalidConfig("max_tags must be at least 1".into()));
        }
        if self.mode == TaggerMode::Llm {
            match &self.llm {
                Some(ep) => ep.validate()?,
                None => {
                    return Err(Error::InvalidConfig(
                        "LLM tagger mode needs an endpoint (base_url, model_name)".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Box<dyn Tagger>> {
        self.validate()?;
        Ok(match self.mode {
            TaggerMode::Deterministic => {
                let stoplist = match &self.stoplist_path {
                    Some(p) => Arc::new(Stoplist::from_file(p)?),
                    None => Stoplist::english(),
                };
                Box::new(DeterministicTagger::new(self.max_tags, stoplist)?)
            }
            TaggerMode::Llm => {
                let mut endpoint = self.llm.clone().expect("validated above");
                if endpoint.api_key.is_none() {
                    endpoint.api_key = std::env::var(API_KEY_ENV).ok();
                }
                Box::new(LlmTagger::new(endpoint, self.max_tags)?)
            }
        })
    }
}

/// One-shot chunk tagging under `cfg`, honoring its vocabulary constraint.
pub fn tag_chunk(text: &str, cfg: &TaggerConfig) -> Result<Vec<Tag>> {
    cfg.build()?.tag(text, cfg.vocabulary_constraint.as_ref())
}

/// One-shot query tagging restricted to `vocabulary`.
pub fn tag_query(query: &str, vocabulary: &Vocabulary, cfg: &TaggerConfig) -> Result<Vec<Tag>> {
    cfg.build()?.tag_query(query, vocabulary)
}

/// Lowercased, NFC-composed alphanumeric runs. Everything else separates.
pub fn tokenize(text: &str) -> Vec<String> {
    let folded: String = text.to_lowercase().nfc().collect();
    folded
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Normalizes raw tag strings from an untrusted source: drops empties and
/// repeats, drops anything outside `constraint`, keeps the first `max_tags`.
pub(crate) fn finish_tags(
    raw: impl IntoIterator<Item = String>,
    constraint: Option<&Vocabulary>,
    max_tags: usize,
) -> Result<Vec<Tag>> {
    let mut out: Vec<Tag> = Vec::new();
    for s in raw {
        let Ok(tag) = Tag::new(&s) else { continue };
        if constraint.is_some_and(|v| !v.contains(&tag)) || out.contains(&tag) {
            continue;
        }
        out.push(tag);
        if out.len() == max_tags {
            break;
        }
    }
    if out.is_empty() {
        Err(Error::NoTagsFound)
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_folds_and_splits() {
        assert_eq!(tokenize("What PET eats fish?"), ["what", "pet", "eats", "fish"]);
        assert_eq!(tokenize("it's  1999-2000"), ["it", "s", "1999", "2000"]);
        assert!(tokenize(" ,.; ").is_empty());
    }

    #[test]
    fn finish_tags_filters_untrusted_output() {
        let vocab = Vocabulary::from_surfaces(["cat", "fish"]);
        let raw = ["Cat", "dog", "cat ", "", "FISH", "cat"].map(String::from);
        let tags = finish_tags(raw, Some(&vocab), 8).unwrap();
        assert_eq!(tags, vec![Tag::from("cat"), Tag::from("fish")]);

        let raw = ["a", "b", "c"].map(String::from);
        assert_eq!(finish_tags(raw, None, 2).unwrap().len(), 2);

        let raw = ["dog"].map(String::from);
        assert!(matches!(finish_tags(raw, Some(&vocab), 8), Err(Error::NoTagsFound)));
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = TaggerConfig::default();
        assert_eq!(cfg.max_tags, 8);
        assert_eq!(cfg.mode, TaggerMode::Deterministic);
        assert!(cfg.build().is_ok());

        let llm = TaggerConfig {
            mode: TaggerMode::Llm,
            ..TaggerConfig::default()
        };
        assert!(matches!(llm.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn one_shot_helpers() {
        let cfg = TaggerConfig {
            vocabulary_constraint: Some(Vocabulary::new()),
            ..TaggerConfig::default()
        };
        assert!(matches!(tag_chunk("any text at all", &cfg), Err(Error::NoTagsFound)));

        let vocab = Vocabulary::from_surfaces(["pet", "fish"]);
        let tags = tag_query("What pet eats fish?", &vocab, &TaggerConfig::default()).unwrap();
        assert_eq!(tags, vec![Tag::from("fish"), Tag::from("pet")]);
    }
}
