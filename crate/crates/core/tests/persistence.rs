mod common;

use bambookg::persist::{decode_snapshot, encode_snapshot, read_jsonl, write_jsonl};
use bambookg::recall::RetrievalParams;
use bambookg::{load_snapshot, save_snapshot, Error, MemoryStore};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_store(seed: u64) -> MemoryStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_store(&random_corpus(&mut rng, 4, 6, 16, 6))
}

/// Every single-tag query plus a few mixed ones, under two budgets.
fn same_answers(a: &MemoryStore, b: &MemoryStore) -> bool {
    let mut queries: Vec<String> = a.graph().tags().map(|(_, t)| t.as_str().to_owned()).collect();
    queries.extend(random_queries(&mut ChaCha8Rng::seed_from_u64(1), 5, 16));
    [RetrievalParams::default(), RetrievalParams::new(1, 1)].iter().all(|p| {
        queries
            .iter()
            .all(|q| recall_view(a, q, p) == recall_view(b, q, p))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn binary_round_trip_preserves_answers(seed in any::<u64>()) {
        let store = random_store(seed);
        let bytes = encode_snapshot(&store);
        let back = decode_snapshot(&bytes).unwrap();
        prop_assert_eq!(encode_snapshot(&back), bytes);
        prop_assert_eq!(store_weights(&back), store_weights(&store));
        prop_assert!(same_answers(&store, &back));
    }

    #[test]
    fn jsonl_round_trip_preserves_answers(seed in any::<u64>()) {
        let store = random_store(seed);
        let mut buf = Vec::new();
        write_jsonl(&store, &mut buf).unwrap();
        let back = read_jsonl(buf.as_slice()).unwrap();
        prop_assert_eq!(encode_snapshot(&back), encode_snapshot(&store));
    }

    #[test]
    fn byte_damage_is_detected(seed in any::<u64>(), at in any::<prop::sample::Index>(), mask in 1u8..=255) {
        let mut bytes = encode_snapshot(&random_store(seed));
        let i = at.index(bytes.len());
        bytes[i] ^= mask;
        prop_assert!(matches!(decode_snapshot(&bytes), Err(Error::CorruptSnapshot(_))));
    }

    #[test]
    fn truncation_is_detected(seed in any::<u64>(), at in any::<prop::sample::Index>()) {
        let bytes = encode_snapshot(&random_store(seed));
        let cut = at.index(bytes.len());
        prop_assert!(decode_snapshot(&bytes[..cut]).is_err());
    }
}

#[test]
fn every_byte_of_a_small_snapshot_is_covered() {
    let bytes = encode_snapshot(&random_store(3));
    for i in 0..bytes.len() {
        for mask in [0x01, 0x80, 0xff] {
            let mut damaged = bytes.clone();
            damaged[i] ^= mask;
            assert!(
                matches!(decode_snapshot(&damaged), Err(Error::CorruptSnapshot(_))),
                "flip {mask:#x} at byte {i} went unnoticed"
            );
        }
    }
}

#[test]
fn repeated_saves_write_identical_files() {
    let store = random_store(11);
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.bkg"), dir.path().join("b.bkg"));
    save_snapshot(&store, &a).unwrap();
    save_snapshot(&load_snapshot(&a).unwrap(), &b).unwrap();
    save_snapshot(&store, &a).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn loaded_store_accepts_more_documents() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let docs = random_corpus(&mut rng, 6, 4, 12, 5);
    let (head, tail) = docs.split_at(3);
    let mut resumed = decode_snapshot(&encode_snapshot(&build_store(head))).unwrap();
    for d in tail {
        resumed
            .ingest_pretagged(&d.id, d.chunks.iter().map(|c| (chunk_text(c), c.clone())))
            .unwrap();
    }
    assert_eq!(store_weights(&resumed), store_weights(&build_store(&docs)));
    assert!(matches!(
        resumed.ingest_pretagged(&docs[0].id, [("again".to_string(), vec!["x"])]),
        Err(Error::DuplicateDocument(_))
    ));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_snapshot(dir.path().join("absent.bkg")), Err(Error::Io { .. })));
}
