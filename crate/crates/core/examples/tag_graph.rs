// The co-occurrence graph and the chunk index used directly, without the
// chunker or a tagger.
//
// ```bash
// cargo run --example tag_graph
// ```

use bambookg::{Chunk, ChunkId, ChunkIndex, TagGraph};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut graph = TagGraph::new();
    let mut index = ChunkIndex::new();

    let chunks: [&[&str]; 3] = [&["cat", "pet"], &["cat", "pet", "indoor"], &["pet", "dog"]];
    for (ordinal, tags) in chunks.iter().enumerate() {
        let ids = tags.iter().map(|t| graph.intern_tag(t)).collect::<Result<Vec<_>, _>>()?;
        let id = ChunkId::new("notes", ordinal as u32);
        graph.record_cooccurrence(&ids, &id)?;
        index.insert(Chunk {
            id,
            text: tags.join(" ").into(),
            token_count: tags.len() as u32,
            tags: ids,
        })?;
    }

    let cat = graph.tag_id("cat").unwrap();
    let pet = graph.tag_id("pet").unwrap();
    let dog = graph.tag_id("dog").unwrap();

    println!("w(cat, pet) = {:?}", graph.weight(cat, pet).map(|w| w.0));
    let behind: Vec<String> = index.chunks_for_edge(cat, pet)?.iter().map(|c| c.to_string()).collect();
    println!("chunks behind cat-pet: {behind:?}");

    let name = |id| graph.surface(id).map_or("?", |t| t.as_str());
    let first = graph.top_first_degree(dog, 5)?;
    println!(
        "dog's first-degree neighbors: {:?}",
        first.iter().map(|(t, w)| (name(*t), w.0)).collect::<Vec<_>>()
    );

    let via: Vec<_> = first.iter().map(|(t, _)| *t).collect();
    for s in graph.top_second_degree(dog, &via, 3, 0.5)? {
        println!("second degree: {} (score {}, via {})", name(s.tag), s.score, name(s.via));
    }
    assert_eq!(graph.weight(cat, pet).map(|w| w.0), Some(2));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
