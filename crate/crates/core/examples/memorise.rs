// Chunk, tag and ingest a few documents, then look at what was learned.
//
// ```bash
// cargo run --example memorise
// ```

use bambookg::{ingest_corpus, ChunkingConfig, DeterministicTagger, Document, MemoryStore};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let docs = [
        Document::new(
            "pets",
            "Cats are popular indoor pets. A cat sleeps most of the day.\n\n\
             Dogs are loyal pets that need daily walks.",
        ),
        Document::new(
            "aquarium",
            "Goldfish are common aquarium pets. Fish need clean water and a filter.",
        ),
    ];

    let mut store = MemoryStore::new();
    let tagger = DeterministicTagger::with_english_stoplist(8)?;
    let reports = ingest_corpus(&mut store, &docs, &ChunkingConfig::default(), &tagger)?;

    for r in &reports {
        println!(
            "{}: {} chunk(s), {} new tags, {} new edges, {} reinforced",
            r.doc_id, r.chunks_created, r.tags_created, r.edges_created, r.edges_reinforced
        );
    }

    let pets = store.graph().tag_id("pets").expect("tagged in both documents");
    println!("\nstrongest neighbors of \"pets\":");
    for (tag, weight) in store.graph().top_first_degree(pets, 5)? {
        println!("  {:<10} {}", store.surface(tag), weight.0);
    }

    let stats = store.stats();
    println!("\n{} tags, {} edges, {} chunks", stats.nodes, stats.edges, stats.chunks);
    assert_eq!(stats.chunks, 2);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
