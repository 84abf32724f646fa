// Queries that only partly match the vocabulary still recall context; a
// query with no known tags is reported as such.
//
// ```bash
// cargo run --example partial_recall
// ```

use bambookg::{recall, DeterministicTagger, Error, MemoryStore, RetrievalParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut store = MemoryStore::new();
    store.ingest_pretagged(
        "notes",
        [
            ("Cats are pets.".to_string(), vec!["cat", "pet"]),
            ("Dogs are pets too.".to_string(), vec!["dog", "pet"]),
        ],
    )?;
    let tagger = DeterministicTagger::with_english_stoplist(8)?;
    let params = RetrievalParams::default();

    // "hamster" was never seen; "pet" was.
    let out = recall(&store, "Is a hamster a good pet?", &params, &tagger)?;
    println!("matched tags: {:?}", out.query_tags.iter().map(|t| t.as_str()).collect::<Vec<_>>());
    for c in &out.context.chunks {
        println!("  {}: {}", c.id, c.text);
    }
    assert!(!out.context.is_empty());

    match recall(&store, "Quantum chromodynamics?", &params, &tagger) {
        Err(Error::NoKnownTags) => println!("no known tags in the second query"),
        other => return Err(format!("unexpected outcome: {other:?}").into()),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
