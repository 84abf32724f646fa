//! Retrieval benchmark over multi-hop QA datasets.

mod dataset;
mod run;

pub use dataset::{load_dataset, parse_dataset, sample_instances, ContextDoc, DatasetFormat, QaInstance};
pub use run::{
    aggregate, csv_string, run_benchmark, run_benchmark_with_hook, write_csv, AggregateRow, BenchConfig, CsvOptions,
    QuestionResult, QuestionStatus, RecallHook, RetrievalMetrics, CSV_COLUMNS,
};
