// Tag chunks through an OpenAI-compatible chat-completions service.
//
// Set `BAMBOOKG_LLM_URL` and `BAMBOOKG_LLM_MODEL` (and `BAMBOOKG_API_KEY`
// if the service needs one) to use a real endpoint. Otherwise a small
// in-process stand-in answers each request with the message's longer words.
//
// ```bash
// cargo run --example llm_tagger
// ```

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::time::Duration;

use bambookg::tagger::LlmTaggerEndpoint;
use bambookg::{ingest_document, recall, ChunkingConfig, LlmTagger, MemoryStore, RetrievalParams};

/// Serves chat completions on an ephemeral port until the process exits.
fn spawn_stand_in() -> std::io::Result<String> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let url = format!("http://{}", listener.local_addr()?);
    std::thread::spawn(move || {
        for conn in listener.incoming().flatten() {
            std::thread::spawn(move || {
                let mut reader = BufReader::new(conn.try_clone().expect("clone socket"));
                let mut conn = conn;
                loop {
                    let mut length = 0usize;
                    let mut line = String::new();
                    loop {
                        line.clear();
                        if reader.read_line(&mut line).unwrap_or(0) == 0 {
                            return;
                        }
                        if line == "\r\n" {
                            break;
                        }
                        if let Some((k, v)) = line.split_once(':') {
                            if k.eq_ignore_ascii_case("content-length") {
                                length = v.trim().parse().unwrap_or(0);
                            }
                        }
                    }
                    let mut body = vec![0; length];
                    if reader.read_exact(&mut body).is_err() {
                        return;
                    }
                    let request: serde_json::Value = serde_json::from_slice(&body).unwrap_or_default();
                    let text = request.pointer("/messages/1/content").and_then(|v| v.as_str()).unwrap_or("");
                    let mut words: Vec<String> = text
                        .split(|c: char| !c.is_alphanumeric())
                        .filter(|w| w.len() > 4)
                        .map(str::to_lowercase)
                        .collect();
                    words.dedup();
                    let content = serde_json::to_string(&words).expect("strings serialize");
                    let reply = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]})
                        .to_string();
                    let head = format!(
                        "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n",
                        reply.len()
                    );
                    if conn.write_all(head.as_bytes()).and_then(|_| conn.write_all(reply.as_bytes())).is_err() {
                        return;
                    }
                }
            });
        }
    });
    Ok(url)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (url, model) = match (std::env::var("BAMBOOKG_LLM_URL"), std::env::var("BAMBOOKG_LLM_MODEL")) {
        (Ok(url), Ok(model)) => (url, model),
        _ => (spawn_stand_in()?, "stand-in".to_owned()),
    };
    let endpoint = LlmTaggerEndpoint::new(url, model, Duration::from_secs(30));
    let tagger = LlmTagger::new(endpoint, 8)?;

    let mut store = MemoryStore::new();
    let cfg = ChunkingConfig::default();
    ingest_document(&mut store, "Goldfish swim in glass aquariums.", "fish", &cfg, &tagger)?;
    ingest_document(&mut store, "Aquariums need pumps and filters.", "kit", &cfg, &tagger)?;

    let out = recall(&store, "Which aquariums suit goldfish?", &RetrievalParams::default(), &tagger)?;
    println!("query tags: {:?}", out.query_tags.iter().map(|t| t.as_str()).collect::<Vec<_>>());
    for c in &out.context.chunks {
        println!("  {} {}", c.id, c.text);
    }
    println!(
        "tagging {:?} (one service call), traversal {:?} ({} service calls)",
        out.timing.tagging, out.timing.traversal, out.timing.traversal_external_calls
    );
    assert_eq!(out.timing.traversal_external_calls, 0);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
