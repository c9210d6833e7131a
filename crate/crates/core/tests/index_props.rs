mod common;

use std::sync::Arc;

use proptest::prelude::*;
use simsearch_core::index::mifile::MiFile;
use simsearch_core::index::napp::Napp;
use simsearch_core::index::perm::{closest_pivots, permutation, pivot_distances, pivot_order};
use simsearch_core::index::ppindex::PpIndex;
use simsearch_core::index::proj_incsort::{select_smallest, select_smallest_queue};
use simsearch_core::index::vptree::{VpBuildParams, VpOracle, VpSearchParams, VpTree, UNLIMITED_LEAVES};
use simsearch_core::index::{apply_query_time_params, create_index, Index, IndexContext};
use simsearch_core::math::OrdF64;
use simsearch_core::query::Query;
use simsearch_core::{create_space, DataSet, DistType, ObjectRecord, ParamMap, SpaceRef};

fn ctx_from(space: &str, seed: u64, n: usize, dim: usize, offset: f64) -> (IndexContext, DataSet) {
    let s: SpaceRef = create_space(space, DistType::Float).unwrap();
    let shift = |d: DataSet| {
        DataSet::from_records(
            s.name(),
            d.iter().map(|r| {
                let v = match s.vector(r.view()) {
                    Some(simsearch_core::space::VectorData::Dense(v)) => v,
                    _ => unreachable!(),
                };
                let v: Vec<f64> = v.iter().map(|x| x + offset).collect();
                s.from_dense(0, r.label(), &v).unwrap()
            }),
        )
    };
    let data = shift(common::uniform(&*s, n, dim, seed));
    let queries = shift(common::uniform(&*s, 10, dim, seed ^ 0xabc));
    (IndexContext::new(s, Arc::new(data), seed), queries)
}

fn knn(index: &dyn Index, ctx: &IndexContext, q: &ObjectRecord, k: usize) -> (Vec<u32>, u64) {
    let mut query = Query::knn(&*ctx.space, q.view(), k);
    index.search(&mut query).unwrap();
    (query.result_ids(), query.distance_count())
}

fn range(index: &dyn Index, ctx: &IndexContext, q: &ObjectRecord, r: f64) -> Vec<u32> {
    let mut query = Query::range(&*ctx.space, q.view(), r);
    index.search(&mut query).unwrap();
    let mut ids = query.result_ids();
    ids.sort_unstable();
    ids
}

fn brute_range(ctx: &IndexContext, q: &ObjectRecord, r: f64) -> Vec<u32> {
    ctx.data
        .iter()
        .filter(|x| ctx.space.distance(x.view(), q.view()) <= r)
        .map(|x| x.id())
        .collect()
}

fn recall_of(index: &dyn Index, ctx: &IndexContext, queries: &DataSet, k: usize) -> f64 {
    common::recall(ctx, index, queries, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exact_methods_match_brute_force(seed in 0u64..1000, k in 1usize..12, r in 0.05f64..0.4) {
        let (ctx, queries) = ctx_from("l2", seed, 600, 4, 0.0);
        for (method, params) in [
            ("seq_search", ""),
            ("vptree", "bucketSize=5"),
            ("ghtree", "bucketSize=5"),
            ("list_clusters", "bucketSize=10"),
            ("mult_index", "methodName=vptree,indexQty=2"),
        ] {
            let index = create_index(method, &ctx, &mut ParamMap::parse(params).unwrap()).unwrap();
            for q in queries.iter() {
                prop_assert_eq!(knn(&*index, &ctx, q, k).0, common::brute_knn(&ctx, q, k), "{}", method);
                prop_assert_eq!(range(&*index, &ctx, q, r), brute_range(&ctx, q, r), "{}", method);
            }
        }
    }

    #[test]
    fn bbtree_is_exact_for_divergences(seed in 0u64..1000, k in 1usize..6) {
        for space in ["kldivgenfast", "itakurasaitofast"] {
            let (ctx, queries) = ctx_from(space, seed, 400, 4, 0.05);
            let index = create_index("bbtree", &ctx, &mut ParamMap::parse("bucketSize=8").unwrap()).unwrap();
            for q in queries.iter() {
                prop_assert_eq!(knn(&*index, &ctx, q, k).0, common::brute_knn(&ctx, q, k), "{}", space);
            }
        }
    }

    #[test]
    fn napp_matches_intersection_oracle(seed in 0u64..1000, nps in 1usize..=6) {
        let (ctx, queries) = ctx_from("l2", seed, 300, 4, 0.0);
        let mut napp = Napp::build(&ctx, &mut ParamMap::parse("numPivot=24,numPivotIndex=6,chunkIndexSize=70").unwrap()).unwrap();
        apply_query_time_params(&mut napp, &ParamMap::parse(&format!("numPivotSearch={nps}")).unwrap()).unwrap();
        let pivots = napp.pivots().to_vec();
        for q in queries.iter() {
            let qp = closest_pivots(&pivot_distances(&*ctx.space, &pivots, q.view()), 6);
            let expected: Vec<(u32, u32)> = ctx.data.iter().filter_map(|x| {
                let xp = closest_pivots(&pivot_distances(&*ctx.space, &pivots, x.view()), 6);
                let shared = xp.iter().filter(|p| qp.contains(p)).count() as u32;
                (shared as usize >= nps).then_some((x.id(), shared))
            }).collect();
            let mut query = Query::knn(&*ctx.space, q.view(), 1);
            prop_assert_eq!(napp.candidates(&mut query), expected);
            // the filter step computes exactly one distance per pivot
            prop_assert_eq!(query.distance_count(), 24);
        }
    }

    #[test]
    fn mifile_matches_estimate_oracle(seed in 0u64..1000, nps in 1usize..=8, mpd in 1usize..20) {
        let (ctx, queries) = ctx_from("l2", seed, 300, 4, 0.0);
        let (npivot, npi) = (20usize, 8usize);
        // external pivots make the oracle independent of how the index samples them
        let ext = pivots_of(&ctx, npivot);
        let mut ext_ctx = ctx.clone();
        ext_ctx.pivots = Some(ext.clone());
        let mut mi = MiFile::build(&ext_ctx, &mut ParamMap::parse(&format!("numPivot={npivot},numPivotIndex={npi}")).unwrap()).unwrap();
        apply_query_time_params(&mut mi, &ParamMap::parse(&format!("numPivotSearch={nps},maxPosDiff={mpd}")).unwrap()).unwrap();
        let perms: Vec<Vec<u32>> = ctx.data.iter().map(|x| permutation(&pivot_distances(&*ctx.space, &ext, x.view()))).collect();
        for q in queries.iter() {
            let qd = pivot_distances(&*ctx.space, &ext, q.view());
            let qperm = permutation(&qd);
            let sel = closest_pivots(&qd, nps);
            let mut expected: Vec<(u64, u32)> = Vec::new();
            for (id, perm) in perms.iter().enumerate() {
                let mut seen = false;
                let mut est = 0u64;
                for &p in &sel {
                    let (qpos, pos) = (qperm[p as usize] as i64, perm[p as usize] as i64);
                    if pos as usize <= npi && (qpos - pos).unsigned_abs() as usize <= mpd {
                        seen = true;
                        est += (qpos - pos).unsigned_abs();
                    } else {
                        est += npi as u64 + 1;
                    }
                }
                if seen {
                    expected.push((est, id as u32));
                }
            }
            let mut query = Query::knn(&*ctx.space, q.view(), 1);
            let mut got = mi.estimates(&mut query);
            got.sort_unstable_by_key(|e| e.1);
            prop_assert_eq!(got, expected);
        }
    }

    #[test]
    fn ppindex_matches_prefix_oracle(seed in 0u64..1000, prefix in 1usize..=4, min_cand in 1usize..80) {
        let (ctx, queries) = ctx_from("l2", seed, 300, 4, 0.0);
        let mut pp = PpIndex::build(&ctx, &mut ParamMap::parse("numPivot=8").unwrap()).unwrap();
        apply_query_time_params(&mut pp, &ParamMap::parse(&format!("prefixLength={prefix},minCandidate={min_cand}")).unwrap()).unwrap();
        let ext = pivots_of(&ctx, 8);
        let seqs: Vec<Vec<u32>> = ctx.data.iter().map(|x| pivot_order(&pivot_distances(&*ctx.space, &ext, x.view()))).collect();
        for q in queries.iter() {
            let qs = pivot_order(&pivot_distances(&*ctx.space, &ext, q.view()));
            let mut len = prefix;
            let expected = loop {
                let set: Vec<u32> = (0..seqs.len() as u32).filter(|&i| seqs[i as usize][..len] == qs[..len]).collect();
                if set.len() >= min_cand || len == 0 {
                    break set;
                }
                len -= 1;
            };
            let mut query = Query::knn(&*ctx.space, q.view(), 1);
            let r = pp.candidate_range(&mut query);
            let mut got = pp.ids_in(r).to_vec();
            got.sort_unstable();
            prop_assert_eq!(got, expected);
        }
    }

    #[test]
    fn queue_selection_equals_sorting(v in prop::collection::vec((0.0f64..10.0, 0u32..1000), 0..200), m in 0usize..50) {
        let items: Vec<(OrdF64, u32)> = v.into_iter().map(|(d, i)| (OrdF64(d), i)).collect();
        let mut a = select_smallest(items.clone(), m);
        let mut b = select_smallest_queue(items.clone(), m);
        a.sort_unstable();
        b.sort_unstable();
        let mut all = items;
        all.sort_unstable();
        all.truncate(m);
        prop_assert_eq!(&a, &all);
        prop_assert_eq!(b, all);
    }

    #[test]
    fn permutations_are_bijections(d in prop::collection::vec(0.0f64..5.0, 1..40)) {
        let perm = permutation(&d);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (1..=d.len() as u32).collect::<Vec<_>>());
        let order = pivot_order(&d);
        for (rank, &p) in order.iter().enumerate() {
            prop_assert_eq!(perm[p as usize] as usize, rank + 1);
        }
        prop_assert!(order.windows(2).all(|w| d[w[0] as usize] < d[w[1] as usize] || (d[w[0] as usize] == d[w[1] as usize] && w[0] < w[1])));
    }

    #[test]
    fn vptree_visits_fewer_leaves_as_alpha_grows(seed in 0u64..1000, a in 1.0f64..4.0, grow in 1.0f64..4.0) {
        let (ctx, queries) = ctx_from("l2", seed, 500, 4, 0.0);
        let tree = VpTree::build(&ctx, VpBuildParams { bucket_size: 5, chunk_bucket: false }).unwrap();
        let sp = |alpha: f64| VpSearchParams {
            oracle: VpOracle { alpha_left: alpha, alpha_right: alpha, ..VpOracle::default() },
            max_leaves: UNLIMITED_LEAVES,
        };
        for q in queries.iter() {
            // range queries keep the radius fixed, so the decision sequence depends only on alpha
            let mut q1 = Query::range(&*ctx.space, q.view(), 0.2);
            let mut q2 = Query::range(&*ctx.space, q.view(), 0.2);
            let l1 = tree.search(&mut q1, &sp(a));
            let l2 = tree.search(&mut q2, &sp(a * grow));
            prop_assert!(l2 <= l1);
        }
    }

    #[test]
    fn full_scan_fraction_is_exact(seed in 0u64..1000) {
        let (ctx, queries) = ctx_from("l2", seed, 300, 4, 0.0);
        for (method, params, qp) in [
            ("mi-file", "numPivot=16,numPivotIndex=16", "dbScanFrac=1"),
            ("perm_incsort_bin", "numPivot=16", "dbScanFrac=1"),
            ("proj_incsort", "projType=rand,projDim=2", "dbScanFrac=1"),
            ("omedrank", "projType=rand,numPivot=3", "dbScanFrac=1,minFreq=1"),
        ] {
            let mut index = create_index(method, &ctx, &mut ParamMap::parse(params).unwrap()).unwrap();
            apply_query_time_params(&mut *index, &ParamMap::parse(qp).unwrap()).unwrap();
            let r = recall_of(&*index, &ctx, &queries, 5);
            prop_assert_eq!(r, 1.0, "{}", method);
        }
    }

    #[test]
    fn recall_grows_with_scan_fraction(seed in 0u64..1000) {
        let (ctx, queries) = ctx_from("l2", seed, 400, 4, 0.0);
        for (method, params) in [("proj_incsort", "projType=rand,projDim=2"), ("perm_incsort_bin", "numPivot=16"), ("mi-file", "numPivot=16,numPivotIndex=8")] {
            let mut index = create_index(method, &ctx, &mut ParamMap::parse(params).unwrap()).unwrap();
            let mut last = 0.0;
            for frac in [0.02, 0.05, 0.1, 0.3, 1.0] {
                apply_query_time_params(&mut *index, &ParamMap::parse(&format!("dbScanFrac={frac}")).unwrap()).unwrap();
                let r = recall_of(&*index, &ctx, &queries, 5);
                prop_assert!(r + 1e-12 >= last, "{method}: recall {r} at {frac} below {last}");
                last = r;
            }
        }
    }
}

/// The pivots `select_pivots` draws from the context seed, as data records.
fn pivots_of(ctx: &IndexContext, num: usize) -> Vec<ObjectRecord> {
    let mut rng = ctx.rng();
    simsearch_core::index::perm::select_pivots(ctx, num, &mut rng).unwrap()
}

#[test]
fn mult_index_copies_only_add_results() {
    let (ctx, queries) = ctx_from("l2", 3, 2000, 8, 0.0);
    let single = create_index("napp", &ctx, &mut ParamMap::parse("numPivot=32,numPivotIndex=4").unwrap()).unwrap();
    let one = create_index("mult_index", &ctx, &mut ParamMap::parse("methodName=napp,indexQty=1,numPivot=32,numPivotIndex=4").unwrap()).unwrap();
    let three = create_index("mult_index", &ctx, &mut ParamMap::parse("methodName=napp,indexQty=3,numPivot=32,numPivotIndex=4").unwrap()).unwrap();
    for q in queries.iter() {
        assert_eq!(knn(&*single, &ctx, q, 10), knn(&*one, &ctx, q, 10));
    }
    assert!(recall_of(&*three, &ctx, &queries, 10) >= recall_of(&*one, &ctx, &queries, 10));
}

#[test]
fn seq_search_counts_one_distance_per_object() {
    let (ctx, queries) = ctx_from("l2", 4, 321, 3, 0.0);
    let index = create_index("seq_search", &ctx, &mut ParamMap::new()).unwrap();
    for q in queries.iter() {
        assert_eq!(knn(&*index, &ctx, q, 3).1, 321);
    }
}

#[test]
fn bbtree_prunes_only_balls_beyond_the_radius() {
    let (ctx, queries) = ctx_from("kldivgenfast", 11, 800, 5, 0.05);
    let tree = simsearch_core::index::bbtree::BbTree::build(&ctx, &mut ParamMap::parse("bucketSize=10").unwrap()).unwrap();
    let mut pruned_any = false;
    for q in queries.iter() {
        for mut query in [Query::knn(&*ctx.space, q.view(), 5), Query::range(&*ctx.space, q.view(), 0.05)] {
            let (_, pruned) = tree.search_audit(&mut query).unwrap();
            for (members, radius) in pruned {
                pruned_any = true;
                let closest = members
                    .iter()
                    .map(|&id| ctx.space.distance(ctx.data.view(id as usize), q.view()))
                    .fold(f64::INFINITY, f64::min);
                assert!(closest >= radius * (1.0 - 1e-9), "pruned a ball at {closest} inside radius {radius}");
            }
        }
    }
    assert!(pruned_any);
}
