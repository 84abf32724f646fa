use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{finish_tags, Tagger, Vocabulary};
use crate::error::{Error, Result};
use crate::graph::Tag;
use crate::instrument;

pub const API_KEY_ENV: &str = "BAMBOOKG_API_KEY";
pub const PROMPT_VERSION: u32 = 1;

const CHUNK_PROMPT: &str = include_str!("../../assets/prompts/tagger_chunk_v1.txt");
const QUERY_PROMPT: &str = include_str!("../../assets/prompts/tagger_query_v1.txt");

/// Connection settings for an OpenAI-compatible chat-completions service.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmTaggerEndpoint {
    pub base_url: String,
    pub model_name: String,
    #[serde(with = "millis")]
    pub timeout: Duration,
    /// Read from the environment, never persisted.
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl fmt::Debug for LlmTaggerEndpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmTaggerEndpoint")
            .field("base_url", &self.base_url)
            .field("model_name", &self.model_name)
            .field("timeout", &self.timeout)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl LlmTaggerEndpoint {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>, timeout: Duration) -> Self {
        LlmTaggerEndpoint {
            base_url: base_url.into(),
            model_name: model_name.into(),
            timeout,
            api_key: std::env::var(API_KEY_ENV).ok(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::InvalidConfig("LLM timeout must be positive".into()));
        }
        if self.base_url.trim().is_empty() {
            return Err(Error::InvalidConfig("LLM base_url is empty".into()));
        }
        Ok(())
    }

    fn completions_url(&self) -> String {
        format!("{}/v1/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

/// Strips the `#` header lines of a prompt asset.
fn template_body(raw: &str) -> String {
    raw.lines()
        .skip_while(|l| l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
        .trim()
        .to_owned()
}

pub fn chunk_prompt(max_tags: usize) -> String {
    template_body(CHUNK_PROMPT).replace("{{max_tags}}", &max_tags.to_string())
}

pub fn query_prompt(max_tags: usize, vocabulary: &Vocabulary) -> String {
    let mut words: Vec<&str> = vocabulary.iter().map(Tag::as_str).collect();
    words.sort_unstable();
    template_body(QUERY_PROMPT)
        .replace("{{max_tags}}", &max_tags.to_string())
        .replace("{{vocabulary}}", &words.join("\n"))
}

/// Tagger backed by a remote chat-completions endpoint. The blocking client
/// pools connections and may be shared across threads.
#[derive(Debug, Clone)]
pub struct LlmTagger {
    endpoint: LlmTaggerEndpoint,
    max_tags: usize,
    client: reqwest::blocking::Client,
}

impl LlmTagger {
    pub fn new(endpoint: LlmTaggerEndpoint, max_tags: usize) -> Result<Self> {
        endpoint.validate()?;
        if max_tags == 0 {
            return Err(Error::InvalidConfig("max_tags must be at least 1".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(endpoint.timeout)
            .build()
            .map_err(|e| Error::TaggerUnavailable(format!("building HTTP client: {e}")))?;
        Ok(LlmTagger {
            endpoint,
            max_tags,
            client,
        })
    }

    pub fn request_body(&self, text: &str, constraint: Option<&Vocabulary>) -> serde_json::Value {
        let system = match constraint {
            Some(v) => query_prompt(self.max_tags, v),
            None => chunk_prompt(self.max_tags),
        };
        json!({
            "model": self.endpoint.model_name,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": text},
            ],
        })
    }

    fn call(&self, body: &serde_json::Value) -> Result<String> {
        instrument::record_external_call();
        let mut req = self.client.post(self.endpoint.completions_url()).json(body);
        if let Some(key) = &self.endpoint.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| Error::TaggerUnavailable(format!("request failed: {e}")))?;
        let status = resp.status();
        let raw = resp
            .text()
            .map_err(|e| Error::TaggerUnavailable(format!("reading response: {e}")))?;
        if !status.is_success() {
            tracing::warn!(%status, body = %raw, "tagger service returned an error status");
            return Err(Error::TaggerUnavailable(format!("service returned {status}")));
        }
        Ok(raw)
    }
}

/// Extracts the tag list from a chat-completions response body. The message
/// content must itself be a JSON array of strings.
pub fn parse_completion(raw: &str) -> Result<Vec<String>> {
    let reject = |why: &str| {
        tracing::warn!(body = %raw, "unusable tagger response: {why}");
        Error::TaggerUnavailable(format!("unusable tagger response: {why}"))
    };
    let value: serde_json::Value = serde_json::from_str(raw).map_err(|_| reject("body is not JSON"))?;
    let content = value
        .pointer("/choices/0/message/content")
        .and_then(serde_json::Value::as_str)
        .ok_or_else(|| reject("missing choices[0].message.content"))?;
    serde_json::from_str::<Vec<String>>(content.trim())
        .map_err(|_| reject("content is not a JSON array of strings"))
}

impl Tagger for LlmTagger {
    fn tag(&self, text: &str, constraint: Option<&Vocabulary>) -> Result<Vec<Tag>> {
        if matches!(constraint, Some(v) if v.is_empty()) {
            return Err(Error::NoTagsFound);
        }
        let raw = self.call(&self.request_body(text, constraint))?;
        let surfaces = parse_completion(&raw)?;
        finish_tags(surfaces, constraint, self.max_tags)
    }

    fn is_external(&self) -> bool {
        true
    }
}
