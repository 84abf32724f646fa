mod common;

use bambookg::{Error, TagId};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_against_counts(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = random_corpus(&mut rng, 5, 10, 15, 10);
    let store = build_store(&docs);

    prop_assert_eq!(store_weights(&store), oracle_weights(&docs));

    let g = store.graph();
    let ids: Vec<TagId> = g.tags().map(|(id, _)| id).collect();
    for &a in &ids {
        for &b in &ids {
            if a == b {
                prop_assert!(matches!(store.index().chunks_for_edge(a, b), Err(Error::InvalidPair(_))));
                continue;
            }
            let got = store.index().chunks_for_edge(a, b).unwrap();
            prop_assert_eq!(got, oracle_chunks_for_edge(&docs, &surface(g, a), &surface(g, b)));
        }
    }
    Ok(())
}

proptest! {
    #[test]
    fn weights_and_postings_match_counting(seed in any::<u64>()) {
        check_against_counts(seed)?;
    }

    #[test]
    fn neighbor_lists_are_sorted_and_complete(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = build_store(&random_corpus(&mut rng, 4, 8, 12, 6));
        let g = store.graph();
        for (id, _) in g.tags() {
            let listed: Vec<(TagId, u32)> = g.neighbors(id).map(|(t, w)| (t, w.0)).collect();
            prop_assert_eq!(listed.len(), g.degree(id));
            prop_assert_eq!(&listed, &oracle_first(g, id, usize::MAX));
            for (t, w) in listed {
                prop_assert_eq!(g.weight(id, t).map(|w| w.0), Some(w));
            }
        }
    }

    #[test]
    fn total_weight_is_sum_of_pairs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 4, 8, 12, 6);
        let store = build_store(&docs);
        let expected: u64 = chunk_tag_sets(&docs)
            .iter()
            .map(|(_, t)| (t.len() * t.len().saturating_sub(1) / 2) as u64)
            .sum();
        prop_assert_eq!(store.stats().total_weight, expected);
    }
}
