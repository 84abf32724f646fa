use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::QaInstance;
use crate::chunker::ChunkingConfig;
use crate::error::{Error, Result};
use crate::memorise::{ingest_document, IngestReport};
use crate::recall::{recall, RecallOutcome, RetrievalParams};
use crate::store::{MemoryStore, StoreConfig};
use crate::tagger::{Tagger, TaggerConfig};

pub const CSV_COLUMNS: [&str; 7] = [
    "question_id",
    "hops",
    "recall",
    "context_tokens",
    "traversal_ms",
    "tagging_ms",
    "status",
];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub chunking: ChunkingConfig,
    pub tagger: TaggerConfig,
    pub retrieval: RetrievalParams,
    /// Build one store from every instance's documents instead of one store
    /// per question.
    pub shared_corpus: bool,
    /// Sampling seed, echoed into the CSV when set.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionStatus {
    Ok,
    NoKnownTags,
    Error(String),
}

impl QuestionStatus {
    pub fn label(&self) -> String {
        match self {
            QuestionStatus::Ok => "ok".into(),
            QuestionStatus::NoKnownTags => "no_known_tags".into(),
            QuestionStatus::Error(msg) => format!("error: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub question_id: String,
    pub hops: Option<u32>,
    /// Fraction of gold documents with at least one chunk in the context.
    pub recall: f64,
    pub context_tokens: u64,
    pub traversal_ms: f64,
    pub tagging_ms: f64,
    pub status: QuestionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    /// `None` for the all-questions row.
    pub hops: Option<u32>,
    pub questions: usize,
    pub recall: f64,
    pub context_tokens: f64,
    pub traversal_ms: f64,
    pub tagging_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalMetrics {
    pub questions: Vec<QuestionResult>,
    /// The overall mean first, then one row per hop count present.
    pub aggregates: Vec<AggregateRow>,
    pub seed: Option<u64>,
}

/// Receives each successful recall, e.g. to drive an answer model. Not
/// called for failed questions.
pub trait RecallHook: Sync {
    fn on_recall(&self, instance: &QaInstance, outcome: &RecallOutcome);
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn aggregate(questions: &[QuestionResult]) -> Vec<AggregateRow> {
    let row = |hops: Option<u32>, qs: &[&QuestionResult]| AggregateRow {
        hops,
        questions: qs.len(),
        recall: mean(qs.iter().map(|q| q.recall)),
        context_tokens: mean(qs.iter().map(|q| q.context_tokens as f64)),
        traversal_ms: mean(qs.iter().map(|q| q.traversal_ms)),
        tagging_ms: mean(qs.iter().map(|q| q.tagging_ms)),
    };
    if questions.is_empty() {
        return Vec::new();
    }
    let all: Vec<&QuestionResult> = questions.iter().collect();
    let mut rows = vec![row(None, &all)];
    let mut by_hops: BTreeMap<u32, Vec<&QuestionResult>> = BTreeMap::new();
    for q in questions {
        if let Some(h) = q.hops {
            by_hops.entry(h).or_default().push(q);
        }
    }
    rows.extend(by_hops.into_iter().map(|(h, qs)| row(Some(h), &qs)));
    rows
}

/// Document ids for one question's context: the title, suffixed with
/// `#n` when a title repeats.
fn doc_ids(instance: &QaInstance) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    instance
        .context
        .iter()
        .map(|d| {
            let n = seen.entry(d.title.as_str()).or_insert(0);
            *n += 1;
            if *n == 1 {
                d.title.clone()
            } else {
                format!("{}#{}", d.title, n)
            }
        })
        .collect()
}

fn title_of(doc_id: &str, titles: &HashMap<String, String>) -> String {
    titles.get(doc_id).cloned().unwrap_or_else(|| doc_id.to_owned())
}

fn build_store(
    docs: impl Iterator<Item = (String, String, String)>,
    cfg: &BenchConfig,
    tagger: &dyn Tagger,
) -> Result<(MemoryStore, HashMap<String, String>)> {
    let mut store = MemoryStore::with_config(StoreConfig {
        chunking: cfg.chunking,
        tagger: cfg.tagger.clone(),
        retrieval: cfg.retrieval,
    });
    let mut titles = HashMap::new();
    for (doc_id, title, text) in docs {
        if store.contains_document(&doc_id) {
            continue;
        }
        let result: Result<IngestReport> = ingest_document(&mut store, &text, &doc_id, &cfg.chunking, tagger);
        match result {
            Ok(_) | Err(Error::EmptyDocument(_)) => {}
            Err(e) => return Err(e),
        }
        titles.insert(doc_id, title);
    }
    Ok((store, titles))
}

fn score_question(
    instance: &QaInstance,
    store: &MemoryStore,
    titles: &HashMap<String, String>,
    cfg: &BenchConfig,
    tagger: &dyn Tagger,
    hook: Option<&dyn RecallHook>,
) -> QuestionResult {
    let mut result = QuestionResult {
        question_id: instance.id.clone(),
        hops: instance.hops,
        recall: 0.0,
        context_tokens: 0,
        traversal_ms: 0.0,
        tagging_ms: 0.0,
        status: QuestionStatus::Ok,
    };
    match recall(store, &instance.question, &cfg.retrieval, tagger) {
        Ok(outcome) => {
            let retrieved: BTreeSet<String> = outcome
                .context
                .chunks
                .iter()
                .map(|c| title_of(&c.id.doc, titles))
                .collect();
            let gold = &instance.gold_titles;
            let hit = gold.iter().filter(|t| retrieved.contains(*t)).count();
            result.recall = if gold.is_empty() {
                0.0
            } else {
                hit as f64 / gold.len() as f64
            };
            result.context_tokens = outcome.context.total_tokens;
            result.traversal_ms = outcome.timing.traversal.as_secs_f64() * 1e3;
            result.tagging_ms = outcome.timing.tagging.as_secs_f64() * 1e3;
            if let Some(h) = hook {
                h.on_recall(instance, &outcome);
            }
        }
        Err(Error::NoKnownTags) => result.status = QuestionStatus::NoKnownTags,
        Err(e) => result.status = QuestionStatus::Error(e.to_string()),
    }
    result
}

pub fn run_benchmark(instances: &[QaInstance], cfg: &BenchConfig) -> Result<RetrievalMetrics> {
    run_benchmark_with_hook(instances, cfg, None)
}

/// For each question: build a store from its context documents (or use the
/// shared store), recall with the question text, and score which gold
/// documents made it into the context. Questions run in parallel; output
/// order follows `instances`.
pub fn run_benchmark_with_hook(
    instances: &[QaInstance],
    cfg: &BenchConfig,
    hook: Option<&dyn RecallHook>,
) -> Result<RetrievalMetrics> {
    cfg.chunking.validate()?;
    cfg.retrieval.validate()?;
    let tagger = cfg.tagger.build()?;
    let tagger: &dyn Tagger = tagger.as_ref();

    let questions: Vec<QuestionResult> = if cfg.shared_corpus {
        let docs = instances.iter().flat_map(|inst| {
            doc_ids(inst)
                .into_iter()
                .zip(&inst.context)
                .map(|(id, d)| (id, d.title.clone(), d.text.clone()))
                .collect::<Vec<_>>()
        });
        let (store, titles) = build_store(docs, cfg, tagger)?;
        instances
            .par_iter()
            .map(|inst| score_question(inst, &store, &titles, cfg, tagger, hook))
            .collect()
    } else {
        instances
            .par_iter()
            .map(|inst| {
                let docs = doc_ids(inst)
                    .into_iter()
                    .zip(&inst.context)
                    .map(|(id, d)| (id, d.title.clone(), d.text.clone()));
                match build_store(docs, cfg, tagger) {
                    Ok((store, titles)) => score_question(inst, &store, &titles, cfg, tagger, hook),
                    Err(e) => QuestionResult {
                        question_id: inst.id.clone(),
                        hops: inst.hops,
                        recall: 0.0,
                        context_tokens: 0,
                        traversal_ms: 0.0,
                        tagging_ms: 0.0,
                        status: QuestionStatus::Error(e.to_string()),
                    },
                }
            })
            .collect()
    };

    Ok(RetrievalMetrics {
        aggregates: aggregate(&questions),
        questions,
        seed: cfg.seed,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Leave timing cells empty so runs can be compared byte for byte.
    pub redact_timings: bool,
}

fn hops_cell(h: Option<u32>) -> String {
    h.map(|h| h.to_string()).unwrap_or_default()
}

/// One row per question, then `__mean__` and `__mean_hops_N__` aggregate
/// rows, then a `__seed__` row when a seed was recorded.
pub fn write_csv(metrics: &RetrievalMetrics, out: impl Write, opts: CsvOptions) -> Result<()> {
    let io = |e: csv::Error| Error::parse("csv", e);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(io)?;
    let ms = |v: f64| {
        if opts.redact_timings {
            String::new()
        } else {
            format!("{v:.3}")
        }
    };
    for q in &metrics.questions {
        w.write_record([
            q.question_id.clone(),
            hops_cell(q.hops),
            format!("{:.6}", q.recall),
            q.context_tokens.to_string(),
            ms(q.traversal_ms),
            ms(q.tagging_ms),
            q.status.label(),
        ])
        .map_err(io)?;
    }
    for a in &metrics.aggregates {
        let id = match a.hops {
            None => "__mean__".to_owned(),
            Some(h) => format!("__mean_hops_{h}__"),
        };
        w.write_record([
            id,
            hops_cell(a.hops),
            format!("{:.6}", a.recall),
            format!("{:.2}", a.context_tokens),
            ms(a.traversal_ms),
            ms(a.tagging_ms),
            format!("aggregate n={}", a.questions),
        ])
        .map_err(io)?;
    }
    if let Some(seed) = metrics.seed {
        let seed = seed.to_string();
        w.write_record(["__seed__", "", "", "", "", "", seed.as_str()]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::parse("csv", e))?;
    Ok(())
}

pub fn csv_string(metrics: &RetrievalMetrics, opts: CsvOptions) -> String {
    let mut buf = Vec::new();
    write_csv(metrics, &mut buf, opts).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}
