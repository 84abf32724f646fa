// Recall context for a question and show where each chunk came from.
//
// ```bash
// cargo run --example recall
// ```

use bambookg::{recall, DeterministicTagger, MemoryStore, RetrievalParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut store = MemoryStore::new();
    store.ingest_pretagged(
        "zoo",
        [
            ("Cats are small indoor pets.".to_string(), vec!["cat", "pet", "indoor"]),
            ("Pet shops sell goldfish and bowls.".to_string(), vec!["pet", "goldfish", "shop"]),
            ("Goldfish eat flakes.".to_string(), vec!["goldfish", "flakes"]),
            ("Tomatoes need sun.".to_string(), vec!["tomato", "sun"]),
        ],
    )?;

    let tagger = DeterministicTagger::with_english_stoplist(8)?;
    let params = RetrievalParams {
        max_context_tokens: Some(20),
        ..RetrievalParams::default()
    };
    let out = recall(&store, "Which cat is a good indoor pet?", &params, &tagger)?;

    let name = |id| store.surface(id);
    println!("query tags: {:?}", out.query_tags.iter().map(|t| t.as_str()).collect::<Vec<_>>());
    for e in &out.subgraph.expansions {
        let first: Vec<_> = e.first.iter().map(|(t, w)| format!("{}({})", name(*t), w.0)).collect();
        let second: Vec<_> = e.second.iter().map(|s| format!("{}({:.2})", name(s.tag), s.score)).collect();
        println!("  {} -> first {:?}, second {:?}", name(e.tag), first, second);
    }

    println!();
    for c in &out.context.chunks {
        let via: Vec<_> = c.provenance.iter().map(|(a, b)| format!("{}-{}", name(*a), name(*b))).collect();
        println!("{} [{:.2}] {}  (via {})", c.id, c.score, c.text, via.join(", "));
    }
    println!(
        "\n{} tokens, traversal took {:?} with {} external calls",
        out.context.total_tokens, out.timing.traversal, out.timing.traversal_external_calls
    );

    assert_eq!(out.timing.traversal_external_calls, 0);
    assert!(out.context.chunks.iter().all(|c| !c.text.contains("Tomatoes")));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
