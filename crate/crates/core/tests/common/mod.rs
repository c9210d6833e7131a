#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simsearch_core::index::IndexContext;
use simsearch_core::query::Query;
use simsearch_core::{create_space, DataSet, DistType, Space, SpaceRef};

/// Uniform random points in the unit cube.
pub fn uniform(space: &dyn Space, n: usize, dim: usize, seed: u64) -> DataSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataSet::from_records(
        space.name(),
        (0..n).map(|i| {
            let v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            space.from_dense(i as u32, (i % 3) as i32, &v).unwrap()
        }),
    )
}

pub fn context(space: &str, n: usize, dim: usize, seed: u64) -> IndexContext {
    let space: SpaceRef = create_space(space, DistType::Float).unwrap();
    let data = Arc::new(uniform(&*space, n, dim, seed));
    IndexContext::new(space, data, seed)
}

/// Exact k nearest ids by scanning, ties to smaller ids.
pub fn brute_knn(ctx: &IndexContext, q: &simsearch_core::ObjectRecord, k: usize) -> Vec<u32> {
    let mut d: Vec<(f64, u32)> = ctx
        .data
        .iter()
        .map(|r| (ctx.space.distance(r.view(), q.view()), r.id()))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|x| x.1).collect()
}

/// Mean fraction of true neighbours found.
pub fn recall(ctx: &IndexContext, index: &dyn simsearch_core::index::Index, queries: &DataSet, k: usize) -> f64 {
    let mut total = 0.0;
    for q in queries.iter() {
        let truth = brute_knn(ctx, q, k);
        let mut query = Query::knn(&*ctx.space, q.view(), k);
        index.search(&mut query).unwrap();
        let got = query.result_ids();
        total += truth.iter().filter(|t| got.contains(t)).count() as f64 / k as f64;
    }
    total / queries.len() as f64
}
