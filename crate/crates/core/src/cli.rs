//! The `bambookg` command-line tool.
//!
//! Settings are layered: built-in defaults, then the configuration saved in
//! an existing store, then a TOML file given with `--config`, then flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use walkdir::WalkDir;

use crate::bench::{load_dataset, run_benchmark, write_csv, BenchConfig, CsvOptions, DatasetFormat};
use crate::error::{Error, Result};
use crate::graph::TagId;
use crate::memorise::{stage_document, IngestReport};
use crate::persist::{import_jsonl, load_snapshot, save_snapshot, write_jsonl};
use crate::recall::{recall, RecallOutcome};
use crate::store::{MemoryStore, StoreConfig};
use crate::tagger::TaggerMode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_KNOWN_TAGS: i32 = 3;

pub const DEFAULT_STORE: &str = "bambookg.bkg";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Human,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TaggerArg {
    Det,
    Llm,
}

#[derive(Debug, Parser)]
#[command(name = "bambookg", version, about = "Associative-memory knowledge graph")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Default, Args)]
struct GlobalArgs {
    /// Snapshot file holding the store.
    #[arg(long, global = true, value_name = "PATH")]
    store: Option<PathBuf>,
    /// TOML settings file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, global = true, value_name = "N")]
    chunk_tokens: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    max_tags: Option<usize>,
    /// First-degree neighbors per query tag.
    #[arg(long, global = true, value_name = "N")]
    x: Option<usize>,
    /// Second-degree neighbors per query tag.
    #[arg(long, global = true, value_name = "N")]
    y: Option<usize>,
    #[arg(long, global = true, value_name = "F")]
    decay: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    max_context_tokens: Option<usize>,
    #[arg(long, global = true, value_enum)]
    tagger: Option<TaggerArg>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Chunk, tag and add text files (or directories of them) to the store.
    Ingest {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Recall context for a question.
    Query { query: String },
    /// Print graph statistics.
    Stats,
    /// Dump the store as JSON lines.
    Export {
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Build the store from a JSON-lines dump.
    Import {
        input: PathBuf,
        /// Replace an existing store file.
        #[arg(long)]
        force: bool,
    },
    /// Print the effective configuration.
    Config,
    /// Measure retrieval recall on a HotPotQA or MuSiQue file.
    Bench {
        dataset: PathBuf,
        #[arg(long, value_name = "hotpotqa|musique")]
        dataset_format: DatasetFormat,
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when absent.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[arg(long)]
        shared_corpus: bool,
        #[arg(long)]
        redact_timings: bool,
    },
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub store: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub chunking: Option<toml::Table>,
    pub tagger: Option<toml::Table>,
    pub retrieval: Option<toml::Table>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct CliConfig {
    pub store: PathBuf,
    pub format: OutputFormat,
    #[serde(flatten)]
    pub settings: StoreConfig,
}

fn merge_table<T: Serialize + for<'de> Deserialize<'de>>(base: &T, overlay: Option<&toml::Table>) -> Result<T> {
    let Some(overlay) = overlay else {
        return Ok(serde_json::from_value(serde_json::to_value(base).expect("config serializes"))
            .expect("config round-trips"));
    };
    let mut merged = serde_json::to_value(base).expect("config serializes");
    let overlay = serde_json::to_value(overlay).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    merge_json(&mut merged, overlay);
    serde_json::from_value(merged).map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn merge_json(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge_json(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl CliConfig {
    fn resolve(args: &GlobalArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let store = args
            .store
            .clone()
            .or(file.store.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_STORE));

        let base = if store.exists() {
            load_snapshot(&store)?.config().clone()
        } else {
            StoreConfig::default()
        };
        let mut settings = StoreConfig {
            chunking: merge_table(&base.chunking, file.chunking.as_ref())?,
            tagger: merge_table(&base.tagger, file.tagger.as_ref())?,
            retrieval: merge_table(&base.retrieval, file.retrieval.as_ref())?,
        };

        if let Some(n) = args.chunk_tokens {
            settings.chunking.chunk_tokens = n;
        }
        if let Some(n) = args.max_tags {
            settings.tagger.max_tags = n;
        }
        if let Some(mode) = args.tagger {
            settings.tagger.mode = match mode {
                TaggerArg::Det => TaggerMode::Deterministic,
                TaggerArg::Llm => TaggerMode::Llm,
            };
        }
        let r = &mut settings.retrieval;
        r.x = args.x.unwrap_or(r.x);
        r.y = args.y.unwrap_or(r.y);
        r.decay = args.decay.unwrap_or(r.decay);
        if args.max_context_tokens.is_some() {
            r.max_context_tokens = args.max_context_tokens;
        }
        settings.validate()?;

        Ok(CliConfig {
            store,
            format: args.format.or(file.format).unwrap_or_default(),
            settings,
        })
    }

    fn open_store(&self) -> Result<MemoryStore> {
        let mut store = load_snapshot(&self.store)?;
        store.set_config(self.settings.clone());
        Ok(store)
    }

    fn open_or_create_store(&self) -> Result<MemoryStore> {
        if self.store.exists() {
            self.open_store()
        } else {
            Ok(MemoryStore::with_config(self.settings.clone()))
        }
    }
}

/// Outcome of a command: an exit code, or an error to report.
enum Failure {
    Exit(i32),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoKnownTags => EXIT_NO_KNOWN_TAGS,
        Error::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Runs the tool with `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };

    let result = CliConfig::resolve(&cli.global)
        .map_err(Failure::from)
        .and_then(|cfg| dispatch(cli.command, &cfg, out, err));
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Exit(code)) => code,
        Err(Failure::Error(e)) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::NoKnownTags = e {
                let _ = writeln!(
                    err,
                    "none of the query's terms are tags in this store; try other wording or ingest more text"
                );
            }
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Ingest { paths } => cmd_ingest(&paths, cfg, out, err),
        Command::Query { query } => cmd_query(&query, cfg, out),
        Command::Stats => cmd_stats(cfg, out),
        Command::Export { out: path } => cmd_export(path.as_deref(), cfg, out),
        Command::Import { input, force } => cmd_import(&input, force, cfg, out),
        Command::Config => cmd_config(cfg, out),
        Command::Bench {
            dataset,
            dataset_format,
            sample,
            seed,
            csv,
            shared_corpus,
            redact_timings,
        } => {
            let bench = BenchConfig {
                chunking: cfg.settings.chunking,
                tagger: cfg.settings.tagger.clone(),
                retrieval: cfg.settings.retrieval,
                shared_corpus,
                seed: Some(seed),
            };
            let instances = load_dataset(&dataset, dataset_format, sample, seed)?;
            let metrics = run_benchmark(&instances, &bench)?;
            let opts = CsvOptions { redact_timings };
            match csv {
                Some(path) => {
                    let mut buf = Vec::new();
                    write_csv(&metrics, &mut buf, opts)?;
                    crate::persist::atomic_write(&path, &buf)?;
                    if let Some(all) = metrics.aggregates.first() {
                        write_out(out, &format!("{} questions, mean recall {:.4}\n", all.questions, all.recall))?;
                    }
                }
                None => write_csv(&metrics, out, opts)?,
            }
            Ok(())
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn write_json(out: &mut dyn Write, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    write_out(out, &text)
}

/// Files named on the command line, with directories expanded in sorted
/// order. Each file's document id is its path as reached from the argument,
/// with `/` separators.
/// Files found under the arguments as `(doc id, path)`, and the arguments that
/// could not be walked.
type Collected = (Vec<(String, PathBuf)>, Vec<(String, Error)>);

fn collect_files(paths: &[PathBuf]) -> Collected {
    let mut files = Vec::new();
    let mut errors = Vec::new();
    for root in paths {
        if root.is_dir() {
            for entry in WalkDir::new(root).sort_by_file_name() {
                match entry {
                    Ok(e) if e.file_type().is_file() => files.push((doc_id(e.path()), e.into_path())),
                    Ok(_) => {}
                    Err(e) => {
                        let path = e.path().unwrap_or(root).to_path_buf();
                        errors.push((doc_id(&path), Error::io(&path, e.into())));
                    }
                }
            }
        } else {
            files.push((doc_id(root), root.clone()));
        }
    }
    (files, errors)
}

fn doc_id(path: &Path) -> String {
    let parts: Vec<String> = path
        .components()
        .filter(|c| !matches!(c, std::path::Component::CurDir))
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    parts.join("/").replace("//", "/")
}

fn cmd_ingest(paths: &[PathBuf], cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (files, mut errors) = collect_files(paths);
    if files.is_empty() && errors.is_empty() {
        let _ = writeln!(err, "error: no documents found");
        return Err(Failure::Exit(EXIT_RUNTIME));
    }

    let mut store = cfg.open_or_create_store()?;
    let tagger = cfg.settings.tagger.build()?;
    let chunking = cfg.settings.chunking;

    let staged: Vec<_> = files
        .par_iter()
        .map(|(id, path)| {
            if store.contains_document(id) {
                return Err(Error::DuplicateDocument(id.clone()));
            }
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            stage_document(&text, id, &chunking, tagger.as_ref())
        })
        .collect();

    let mut reports: Vec<IngestReport> = Vec::new();
    for ((id, _), staged) in files.iter().zip(staged) {
        match staged.and_then(|s| store.merge(s)) {
            Ok(r) => reports.push(r),
            Err(e) => errors.push((id.clone(), e)),
        }
    }
    if !reports.is_empty() {
        save_snapshot(&store, &cfg.store)?;
    }

    let stats = store.stats();
    match cfg.format {
        OutputFormat::Json => write_json(
            out,
            &json!({
                "store": cfg.store,
                "documents": reports,
                "errors": errors.iter().map(|(d, e)| json!({"doc": d, "error": e.to_string()})).collect::<Vec<_>>(),
                "stats": stats,
            }),
        )?,
        OutputFormat::Human => {
            let mut text = String::new();
            for r in &reports {
                text += &format!(
                    "ingested {}: {} chunks, {} new tags, {} new edges, {} reinforced\n",
                    r.doc_id, r.chunks_created, r.tags_created, r.edges_created, r.edges_reinforced
                );
            }
            text += &format!(
                "{} documents ingested, {} failed; store has {} tags, {} edges, {} chunks\n",
                reports.len(),
                errors.len(),
                stats.nodes,
                stats.edges,
                stats.chunks
            );
            write_out(out, &text)?;
        }
    }
    for (doc, e) in &errors {
        let _ = writeln!(err, "error: {doc}: {e}");
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Exit(EXIT_RUNTIME))
    }
}

/// Machine-readable recall output. Tags are given as surface strings.
pub fn outcome_json(store: &MemoryStore, query: &str, outcome: &RecallOutcome) -> Value {
    let s = |id: TagId| store.surface(id).to_owned();
    let sg = &outcome.subgraph;
    json!({
        "query": query,
        "query_tags": outcome.query_tags.iter().map(|t| t.as_str()).collect::<Vec<_>>(),
        "subgraph": {
            "nodes": sg.nodes().into_iter().map(s).collect::<Vec<_>>(),
            "expansions": sg.expansions.iter().map(|e| json!({
                "tag": s(e.tag),
                "first_degree": e.first.iter().map(|(t, w)| json!({"tag": s(*t), "weight": w.0})).collect::<Vec<_>>(),
                "second_degree": e.second.iter().map(|d| json!({
                    "tag": s(d.tag), "score": d.score, "via": s(d.via),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "retrieved_edges": sg.retrieved_edges.iter().map(|e| json!({
                "a": s(e.a), "b": s(e.b), "weight": e.weight.0, "strength": e.strength,
            })).collect::<Vec<_>>(),
        },
        "context": {
            "total_tokens": outcome.context.total_tokens,
            "chunks": outcome.context.chunks.iter().map(|c| json!({
                "id": c.id.to_string(),
                "doc": &*c.id.doc,
                "ordinal": c.id.ordinal,
                "token_count": c.token_count,
                "score": c.score,
                "provenance": c.provenance.iter().map(|(a, b)| [s(*a), s(*b)]).collect::<Vec<_>>(),
                "text": c.text,
            })).collect::<Vec<_>>(),
        },
        "timing": {
            "tagging_ms": outcome.timing.tagging.as_secs_f64() * 1e3,
            "traversal_ms": outcome.timing.traversal.as_secs_f64() * 1e3,
            "traversal_external_calls": outcome.timing.traversal_external_calls,
        },
    })
}

fn cmd_query(query: &str, cfg: &CliConfig, out: &mut dyn Write) -> CmdResult {
    let store = cfg.open_store()?;
    let tagger = cfg.settings.tagger.build()?;
    let outcome = recall(&store, query, &cfg.settings.retrieval, tagger.as_ref())?;

    match cfg.format {
        OutputFormat::Json => write_json(out, &outcome_json(&store, query, &outcome))?,
        OutputFormat::Human => {
            let s = |id: TagId| store.surface(id);
            let tags: Vec<&str> = outcome.query_tags.iter().map(|t| t.as_str()).collect();
            let mut text = format!(
                "query tags: {}\nsubgraph: {} tags, {} edges\n",
                tags.join(", "),
                outcome.subgraph.nodes().len(),
                outcome.subgraph.retrieved_edges.len()
            );
            for (i, c) in outcome.context.chunks.iter().enumerate() {
                let via: Vec<String> = c.provenance.iter().map(|(a, b)| format!("{}-{}", s(*a), s(*b))).collect();
                text += &format!(
                    "\n[{}] {} score {:.3} via {}\n{}\n",
                    i + 1,
                    c.id,
                    c.score,
                    via.join(", "),
                    c.text
                );
            }
            text += &format!(
                "\n{} chunks, {} tokens; tagging {:.3} ms, traversal {:.3} ms, external calls during traversal: {}\n",
                outcome.context.chunks.len(),
                outcome.context.total_tokens,
                outcome.timing.tagging.as_secs_f64() * 1e3,
                outcome.timing.traversal.as_secs_f64() * 1e3,
                outcome.timing.traversal_external_calls
            );
            write_out(out, &text)?;
        }
    }
    Ok(())
}

/// The `stats` table, one `name value` pair per line.
pub fn stats_table(store: &MemoryStore) -> String {
    let st = store.stats();
    let rows = [
        ("documents", store.index().documents().count() as u64),
        ("chunks", st.chunks as u64),
        ("tokens", store.index().total_tokens()),
        ("tags", st.nodes as u64),
        ("edges", st.edges as u64),
        ("total_weight", st.total_weight),
        ("max_degree", st.max_degree as u64),
    ];
    rows.iter().map(|(k, v)| format!("{k:<13}{v}\n")).collect()
}

fn cmd_stats(cfg: &CliConfig, out: &mut dyn Write) -> CmdResult {
    let store = if cfg.store.exists() {
        cfg.open_store()?
    } else {
        MemoryStore::new()
    };
    match cfg.format {
        OutputFormat::Human => write_out(out, &stats_table(&store))?,
        OutputFormat::Json => {
            let st = store.stats();
            write_json(
                out,
                &json!({
                    "documents": store.index().documents().count(),
                    "chunks": st.chunks,
                    "tokens": store.index().total_tokens(),
                    "tags": st.nodes,
                    "edges": st.edges,
                    "total_weight": st.total_weight,
                    "max_degree": st.max_degree,
                }),
            )?
        }
    }
    Ok(())
}

fn cmd_export(path: Option<&Path>, cfg: &CliConfig, out: &mut dyn Write) -> CmdResult {
    let store = cfg.open_store()?;
    match path {
        Some(p) => crate::persist::export_jsonl(&store, p)?,
        None => write_jsonl(&store, out).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

fn cmd_import(input: &Path, force: bool, cfg: &CliConfig, out: &mut dyn Write) -> CmdResult {
    if cfg.store.exists() && !force {
        return Err(Error::InvalidConfig(format!(
            "{} already exists; pass --force to replace it",
            cfg.store.display()
        ))
        .into());
    }
    let store = import_jsonl(input)?;
    let bytes = save_snapshot(&store, &cfg.store)?;
    if cfg.format == OutputFormat::Human {
        write_out(out, &format!("wrote {} ({bytes} bytes)\n", cfg.store.display()))?;
    } else {
        write_json(out, &json!({"store": cfg.store, "bytes": bytes}))?;
    }
    Ok(())
}

fn cmd_config(cfg: &CliConfig, out: &mut dyn Write) -> CmdResult {
    match cfg.format {
        OutputFormat::Json => write_json(out, &serde_json::to_value(cfg).expect("config serializes"))?,
        OutputFormat::Human => {
            let text = toml::to_string(cfg).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            write_out(out, &text)?;
        }
    }
    Ok(())
}
