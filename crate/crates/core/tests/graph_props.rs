mod common;

use proptest::prelude::*;
use simsearch_core::index::graph::hnsw::Hnsw;
use simsearch_core::index::graph::swgraph::SwGraph;
use simsearch_core::index::{apply_query_time_params, Index};
use simsearch_core::query::Query;
use simsearch_core::ParamMap;

fn params(s: &str) -> ParamMap {
    ParamMap::parse(s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn swgraph_links_are_symmetric(seed in 0u64..1000, nn in 1usize..8, threads in 1usize..4) {
        let ctx = common::context("l2", 300, 4, seed);
        let g = SwGraph::build(&ctx, &mut params(&format!("NN={nn},indexThreadQty={threads}"))).unwrap();
        let adj = g.adjacency();
        for (i, list) in adj.iter().enumerate() {
            prop_assert!(!list.contains(&(i as u32)), "self loop at {i}");
            for &j in list {
                prop_assert!(adj[j as usize].contains(&(i as u32)), "{i} -> {j} without back link");
            }
        }
    }

    #[test]
    fn hnsw_degrees_respect_caps(seed in 0u64..1000, m in 2usize..8, threads in 1usize..4) {
        let ctx = common::context("l2", 400, 4, seed);
        let g = Hnsw::build(&ctx, &mut params(&format!("M={m},efConstruction=40,indexThreadQty={threads}"))).unwrap();
        let (max_m, max_m0) = g.caps();
        prop_assert_eq!((max_m, max_m0), (m, 2 * m));
        let (entry, top) = g.entry_point();
        prop_assert_eq!(g.node_level(entry as usize), top);
        for i in 0..ctx.data.len() {
            prop_assert!(g.node_level(i) <= top);
            for level in 0..=g.node_level(i) {
                let cap = if level == 0 { max_m0 } else { max_m };
                let links = g.links(i, level);
                prop_assert!(links.len() <= cap, "node {i} level {level}: {} > {cap}", links.len());
                for &j in links {
                    prop_assert!(g.node_level(j as usize) >= level);
                    prop_assert!(j as usize != i);
                }
            }
        }
    }

    #[test]
    fn wide_beam_search_is_exact(seed in 0u64..1000, k in 1usize..10) {
        let ctx = common::context("l2", 200, 3, seed);
        let queries = common::uniform(&*ctx.space, 10, 3, seed ^ 77);
        let mut hnsw = Hnsw::build(&ctx, &mut params("M=6,efConstruction=50")).unwrap();
        let mut sw = SwGraph::build(&ctx, &mut params("NN=6")).unwrap();
        apply_query_time_params(&mut hnsw, &params("efSearch=200")).unwrap();
        apply_query_time_params(&mut sw, &params("efSearch=200")).unwrap();
        for index in [&hnsw as &dyn Index, &sw] {
            for q in queries.iter() {
                let mut query = Query::knn(&*ctx.space, q.view(), k);
                index.search(&mut query).unwrap();
                prop_assert_eq!(query.result_ids(), common::brute_knn(&ctx, q, k), "{}", index.method());
            }
        }
    }
}

#[test]
fn single_worker_builds_are_deterministic() {
    let ctx = common::context("l2", 500, 5, 9);
    let a = Hnsw::build(&ctx, &mut params("M=8,indexThreadQty=1")).unwrap();
    let b = Hnsw::build(&ctx, &mut params("M=8,indexThreadQty=1")).unwrap();
    assert_eq!(a.save().unwrap(), b.save().unwrap());
    let a = SwGraph::build(&ctx, &mut params("NN=8,indexThreadQty=1")).unwrap();
    let b = SwGraph::build(&ctx, &mut params("NN=8,indexThreadQty=1")).unwrap();
    assert_eq!(a.save().unwrap(), b.save().unwrap());
}
