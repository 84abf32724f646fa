//! Loaders for HotPotQA (distractor setting, one JSON array) and MuSiQue
//! (JSON lines). Field shapes are documented in `docs/datasets.md`.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    HotpotQa,
    Musique,
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hotpotqa" | "hotpot" => Ok(DatasetFormat::HotpotQa),
            "musique" => Ok(DatasetFormat::Musique),
            other => Err(Error::InvalidConfig(format!("unknown dataset format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextDoc {
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaInstance {
    pub id: String,
    pub question: String,
    /// Supporting documents and distractors, in file order.
    pub context: Vec<ContextDoc>,
    pub gold_titles: Vec<String>,
    /// `(title, sentence index)` pairs; HotPotQA only.
    pub gold_sentences: Vec<(String, u32)>,
    /// MuSiQue only.
    pub hops: Option<u32>,
}

impl QaInstance {
    fn check_gold(&self) -> Result<()> {
        for title in &self.gold_titles {
            if !self.context.iter().any(|d| &d.title == title) {
                return Err(Error::parse(
                    &self.id,
                    format!("supporting title {title:?} is not among the context documents"),
                ));
            }
        }
        Ok(())
    }
}

fn field<'a>(rec: &'a Value, id: &str, name: &str) -> Result<&'a Value> {
    rec.get(name)
        .ok_or_else(|| Error::parse(id, format!("missing field {name:?}")))
}

fn string(rec: &Value, id: &str, name: &str) -> Result<String> {
    field(rec, id, name)?
        .as_str()
        .map(str::to_owned)
        .ok_or_else(|| Error::parse(id, format!("field {name:?} is not a string")))
}

fn array<'a>(rec: &'a Value, id: &str, name: &str) -> Result<&'a Vec<Value>> {
    field(rec, id, name)?
        .as_array()
        .ok_or_else(|| Error::parse(id, format!("field {name:?} is not an array")))
}

fn record_id(rec: &Value, position: usize, keys: &[&str]) -> String {
    keys.iter()
        .find_map(|k| rec.get(*k).and_then(Value::as_str))
        .map_or_else(|| format!("record {position}"), str::to_owned)
}

fn hotpot_record(rec: &Value, position: usize) -> Result<QaInstance> {
    let id = record_id(rec, position, &["_id", "id"]);
    let question = string(rec, &id, "question")?;

    let mut context = Vec::new();
    for entry in array(rec, &id, "context")? {
        let bad = || Error::parse(&id, "context entries must be [title, [sentences]]");
        let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
        let title = pair[0].as_str().ok_or_else(bad)?.to_owned();
        let sentences = pair[1].as_array().ok_or_else(bad)?;
        let mut parts = Vec::with_capacity(sentences.len());
        for s in sentences {
            parts.push(s.as_str().ok_or_else(bad)?.trim());
        }
        context.push(ContextDoc {
            title,
            text: parts.join(" "),
        });
    }

    let mut gold_titles: Vec<String> = Vec::new();
    let mut gold_sentences = Vec::new();
    for fact in array(rec, &id, "supporting_facts")? {
        let bad = || Error::parse(&id, "supporting facts must be [title, sentence_id]");
        let pair = fact.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
        let title = pair[0].as_str().ok_or_else(bad)?.to_owned();
        let sent = pair[1].as_u64().ok_or_else(bad)? as u32;
        if !gold_titles.contains(&title) {
            gold_titles.push(title.clone());
        }
        gold_sentences.push((title, sent));
    }

    let inst = QaInstance {
        id,
        question,
        context,
        gold_titles,
        gold_sentences,
        hops: None,
    };
    inst.check_gold()?;
    Ok(inst)
}

fn musique_record(rec: &Value, position: usize) -> Result<QaInstance> {
    let id = record_id(rec, position, &["id", "_id"]);
    let question = string(rec, &id, "question")?;

    let mut context = Vec::new();
    let mut gold_titles: Vec<String> = Vec::new();
    for para in array(rec, &id, "paragraphs")? {
        let title = string(para, &id, "title")?;
        let text = string(para, &id, "paragraph_text")?;
        if para.get("is_supporting").and_then(Value::as_bool).unwrap_or(false) && !gold_titles.contains(&title) {
            gold_titles.push(title.clone());
        }
        context.push(ContextDoc { title, text });
    }

    let hops = rec
        .get("question_decomposition")
        .and_then(Value::as_array)
        .map(|d| d.len() as u32)
        .filter(|&n| n > 0)
        .or_else(|| {
            let (n, _) = id.split_once("hop")?;
            n.parse().ok()
        });

    let inst = QaInstance {
        id,
        question,
        context,
        gold_titles,
        gold_sentences: Vec::new(),
        hops,
    };
    inst.check_gold()?;
    Ok(inst)
}

pub fn parse_dataset(text: &str, format: DatasetFormat) -> Result<Vec<QaInstance>> {
    match format {
        DatasetFormat::HotpotQa => {
            let value: Value = serde_json::from_str(text).map_err(|e| Error::parse("file", e))?;
            let records = value
                .as_array()
                .ok_or_else(|| Error::parse("file", "expected a JSON array of records"))?;
            records
                .iter()
                .enumerate()
                .map(|(i, r)| hotpot_record(r, i))
                .collect()
        }
        DatasetFormat::Musique => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, line)| {
                let value: Value =
                    serde_json::from_str(line).map_err(|e| Error::parse(format!("line {}", i + 1), e))?;
                musique_record(&value, i)
            })
            .collect(),
    }
}

/// Keeps `count` records chosen uniformly under `seed`, in file order.
pub fn sample_instances(instances: Vec<QaInstance>, count: usize, seed: u64) -> Vec<QaInstance> {
    if count >= instances.len() {
        return instances;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = rand::seq::index::sample(&mut rng, instances.len(), count).into_vec();
    keep.sort_unstable();
    let mut keep = keep.into_iter().peekable();
    instances
        .into_iter()
        .enumerate()
        .filter_map(|(i, inst)| {
            if keep.peek() == Some(&i) {
                keep.next();
                Some(inst)
            } else {
                None
            }
        })
        .collect()
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    format: DatasetFormat,
    sample: Option<usize>,
    seed: u64,
) -> Result<Vec<QaInstance>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let all = parse_dataset(&text, format)?;
    Ok(match sample {
        Some(n) => sample_instances(all, n, seed),
        None => all,
    })
}
