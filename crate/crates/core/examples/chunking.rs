// Split a long document into roughly even chunks that end on sentence
// boundaries where possible.
//
// ```bash
// cargo run --example chunking
// ```

use bambookg::{chunk_document, ChunkingConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sentence = "The quick brown fox jumps over the lazy dog near the river bank today.";
    let text = vec![sentence; 60].join(" ");

    let cfg = ChunkingConfig::new(200)?;
    let chunks = chunk_document(&text, "fox", &cfg)?;
    for c in &chunks {
        let tail: String = c.text.chars().rev().take(20).collect::<Vec<_>>().into_iter().rev().collect();
        println!("#{} {} tokens, bytes {:?}, ends \"...{}\"", c.ordinal, c.token_count, c.span, tail);
    }
    let total: u32 = chunks.iter().map(|c| c.token_count).sum();
    assert_eq!(total as usize, bambookg::count_tokens(&text));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
