// Save a store as a binary snapshot, reload it, and exchange it as JSON
// lines.
//
// ```bash
// cargo run --example persistence
// ```

use bambookg::persist::encode_snapshot;
use bambookg::{export_jsonl, import_jsonl, load_snapshot, save_snapshot, MemoryStore};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut store = MemoryStore::new();
    store.ingest_pretagged(
        "notes",
        [
            ("Cats are pets.".to_string(), vec!["cat", "pet"]),
            ("Goldfish are pets.".to_string(), vec!["goldfish", "pet"]),
        ],
    )?;

    let dir = tempfile::tempdir()?;
    let bin = dir.path().join("store.bkg");
    let bytes = save_snapshot(&store, &bin)?;
    println!("snapshot: {bytes} bytes");

    let reloaded = load_snapshot(&bin)?;
    assert_eq!(encode_snapshot(&reloaded), encode_snapshot(&store));

    let jsonl = dir.path().join("store.jsonl");
    export_jsonl(&store, &jsonl)?;
    print!("{}", std::fs::read_to_string(&jsonl)?);
    let imported = import_jsonl(&jsonl)?;
    assert_eq!(imported.stats(), store.stats());

    // Any damaged byte is caught by the checksum.
    let mut raw = std::fs::read(&bin)?;
    raw[20] ^= 0x01;
    std::fs::write(&bin, &raw)?;
    match load_snapshot(&bin) {
        Err(e) => println!("damaged snapshot rejected: {e}"),
        Ok(_) => return Err("corruption went unnoticed".into()),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
