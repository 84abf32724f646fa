mod common;

use bambookg::recall::RetrievalParams;
use bambookg::{build_query_subgraph, collect_context, TagId};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pick_query(rng: &mut impl Rng, n: usize) -> Vec<TagId> {
    (0..rng.random_range(1..=3.min(n)))
        .map(|_| TagId(rng.random_range(0..n as u32)))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

proptest! {
    #[test]
    fn full_width_expansion_is_two_hop_bfs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = build_store(&random_corpus(&mut rng, 4, 6, 14, 5));
        let g = store.graph();
        prop_assume!(g.node_count() > 0);
        let n = g.node_count();
        let query = pick_query(&mut rng, n);
        let params = RetrievalParams::new(n, n);
        let sub = build_query_subgraph(g, &query, &params).unwrap();
        let (nodes, edges) = oracle_bfs(g, &query);
        prop_assert_eq!(sub.nodes(), nodes);
        prop_assert_eq!(sub.edge_pairs(), edges);
    }

    #[test]
    fn narrow_expansion_is_sort_and_truncate(seed in any::<u64>(), x in 0usize..4, y in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = build_store(&random_corpus(&mut rng, 4, 6, 14, 5));
        let g = store.graph();
        prop_assume!(g.node_count() > 0);
        let query = pick_query(&mut rng, g.node_count());
        let sub = build_query_subgraph(g, &query, &RetrievalParams::new(x, y)).unwrap();
        for e in &sub.expansions {
            let first: Vec<(TagId, u32)> = e.first.iter().map(|(t, w)| (*t, w.0)).collect();
            prop_assert_eq!(&first, &oracle_first(g, e.tag, x));
            let ids: Vec<TagId> = first.iter().map(|(t, _)| *t).collect();
            let second: Vec<(TagId, f64, TagId)> = e.second.iter().map(|s| (s.tag, s.score, s.via)).collect();
            prop_assert_eq!(second, oracle_second(g, e.tag, &ids, y, 0.5));
        }
    }

    #[test]
    fn context_is_union_of_edge_postings(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = build_store(&random_corpus(&mut rng, 4, 6, 14, 5));
        let g = store.graph();
        prop_assume!(g.node_count() > 0);
        let query = pick_query(&mut rng, g.node_count());
        let params = RetrievalParams::default();
        let sub = build_query_subgraph(g, &query, &params).unwrap();
        let ctx = collect_context(store.index(), &sub, &params);

        let mut expected = std::collections::BTreeMap::new();
        for e in &sub.retrieved_edges {
            for id in store.index().chunks_for_edge(e.a, e.b).unwrap() {
                *expected.entry(id).or_insert(0.0) += e.strength;
            }
        }
        let got: std::collections::BTreeMap<_, _> = ctx.chunks.iter().map(|c| (c.id.clone(), c.score)).collect();
        prop_assert_eq!(got, expected);
        prop_assert!(ctx.chunks.windows(2).all(|w| w[0].score > w[1].score
            || (w[0].score == w[1].score && w[0].id < w[1].id)));
    }

    #[test]
    fn widening_y_never_loses_chunks(seed in any::<u64>(), x in 0usize..5, y in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = build_store(&random_corpus(&mut rng, 4, 6, 14, 5));
        let g = store.graph();
        prop_assume!(g.node_count() > 0);
        let query = pick_query(&mut rng, g.node_count());
        let ids = |x, y| {
            let p = RetrievalParams::new(x, y);
            let sub = build_query_subgraph(g, &query, &p).unwrap();
            collect_context(store.index(), &sub, &p).chunk_ids().into_iter().collect::<std::collections::BTreeSet<_>>()
        };
        prop_assert!(ids(x, y).is_subset(&ids(x, y + 1)));
        prop_assert!(ids(x, 0).is_subset(&ids(x + 1, 0)));
    }
}
