// Retrieval recall on a small HotPotQA-format file, at two expansion
// budgets.
//
// ```bash
// cargo run --example benchmark
// ```

use bambookg::bench::{csv_string, load_dataset, run_benchmark, BenchConfig, CsvOptions, DatasetFormat};
use bambookg::RetrievalParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/hotpotqa_5.json");
    let seed = 7;
    let questions = load_dataset(path, DatasetFormat::HotpotQa, Some(5), seed)?;

    for (x, y) in [(5, 3), (1, 0)] {
        let cfg = BenchConfig {
            retrieval: RetrievalParams::new(x, y),
            seed: Some(seed),
            ..BenchConfig::default()
        };
        let metrics = run_benchmark(&questions, &cfg)?;
        println!("x={x} y={y}");
        print!("{}", csv_string(&metrics, CsvOptions::default()));
        println!();
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
