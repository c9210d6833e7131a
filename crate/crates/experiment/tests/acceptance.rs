//! End-to-end acceptance checks. Each criterion prints one `[PASS]` or `[FAIL]` line;
//! the process exits non-zero if any criterion fails.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simsearch::experiment::{run_on, ExperimentConfig};
use simsearch::gold::GoldCache;
use simsearch::Error;
use simsearch_core::index::napp::Napp;
use simsearch_core::index::perm::{closest_pivots, pivot_distances};
use simsearch_core::index::{create_index, load_index, Index, IndexContext};
use simsearch_core::query::Query;
use simsearch_core::space::space_names;
use simsearch_core::{create_space, DataSet, DistType, ObjectRecord, ParamMap, Space, SpaceRef};

fn uniform(space: &dyn Space, n: usize, dim: usize, seed: u64, offset: f64) -> DataSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataSet::from_records(
        space.name(),
        (0..n).map(|i| {
            let v: Vec<f64> = (0..dim).map(|_| offset + rng.random::<f64>()).collect();
            space.from_dense(i as u32, (i % 3) as i32, &v).unwrap()
        }),
    )
}

fn bootstrap_cfg(space: &str, method: &str) -> ExperimentConfig {
    ExperimentConfig {
        space_type: space.into(),
        method: method.into(),
        max_num_query: 100,
        test_set_qty: 5,
        thread_test_qty: std::thread::available_parallelism().map_or(1, |n| n.get()).min(8),
        ..Default::default()
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------------------

fn exactness() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY);
    let mut notes = Vec::new();
    let cases: &[(&str, &str, &str, f64)] = &[
        ("l2", "vptree", "alphaLeft=1,alphaRight=1,expLeft=1,expRight=1", 0.0),
        ("l2", "ghtree", "", 0.0),
        ("l2", "list_clusters", "", 0.0),
        ("l2", "seq_search", "", 0.0),
        ("kldivgenfast", "bbtree", "", 1e-3),
    ];
    for &(space_name, method, qtp, offset) in cases {
        let space = create_space(space_name, DistType::Float).unwrap();
        let data = uniform(&*space, 10_000, 8, 11, offset);
        let mut cfg = bootstrap_cfg(space_name, method);
        cfg.knn = vec![1, 10];
        cfg.range = vec![0.1];
        if !qtp.is_empty() {
            cfg.query_time_params = vec![qtp.into()];
        }
        cfg.cache_prefix_gs = Some(dir.path().join(space_name).to_string_lossy().into_owned());
        match run_on(&cfg, space, data, None) {
            Ok(out) => {
                for (qt, rows) in &out.per_type {
                    let r = &rows[0];
                    worst.0 = worst.0.min(r.recall.mean);
                    worst.1 = worst.1.max(r.num_closer.mean);
                    if r.recall.mean != 1.0 || r.num_closer.mean != 0.0 {
                        notes.push(format!("{method} {qt}: recall {} numCloser {}", r.recall.mean, r.num_closer.mean));
                    }
                }
            }
            Err(e) => notes.push(format!("{method}: {e}")),
        }
    }
    let detail = format!("min recall {} max numCloser {} {}", worst.0, worst.1, notes.join("; "));
    outcome(notes.is_empty(), detail)
}

fn stochastic(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 1e-5).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn relative_errors(a: &str, b: &str, pairs: usize, seed: u64) -> (f64, f64) {
    let sa = create_space(a, DistType::Double).unwrap();
    let sb = create_space(b, DistType::Double).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut max) = (0.0, 0.0f64);
    for _ in 0..pairs {
        let (x, y) = (stochastic(&mut rng, 128), stochastic(&mut rng, 128));
        let (xa, ya) = (sa.from_dense(0, -1, &x).unwrap(), sa.from_dense(1, -1, &y).unwrap());
        let (xb, yb) = (sb.from_dense(0, -1, &x).unwrap(), sb.from_dense(1, -1, &y).unwrap());
        let (da, db) = (sa.distance(xa.view(), ya.view()), sb.distance(xb.view(), yb.view()));
        let rel = (da - db).abs() / db.abs().max(f64::MIN_POSITIVE);
        sum += rel;
        max = max.max(rel);
    }
    (sum / pairs as f64, max)
}

fn divergence_accuracy() -> Outcome {
    let (js_mean, js_max) = relative_errors("jsdivfastapprox", "jsdivslow", 100_000, 1);
    let fast: Vec<(&str, (f64, f64))> = [
        ("jsdivfast", "jsdivslow"),
        ("kldivgenfast", "kldivgenslow"),
        ("kldivfast", "kldivgenslow"),
        ("itakurasaitofast", "itakurasaitoslow"),
    ]
    .iter()
    .map(|&(a, b)| (a, relative_errors(a, b, 20_000, 2)))
    .collect();
    let fast_max = fast.iter().map(|(_, e)| e.1).fold(0.0, f64::max);
    let pass = js_mean <= 1e-5 && js_max <= 1e-4 && fast_max <= 1e-9;
    let worst = fast.iter().map(|(n, e)| format!("{n} {:.2e}", e.1)).collect::<Vec<_>>().join(", ");
    outcome(pass, format!("JS approx mean {js_mean:.2e} max {js_max:.2e}; fast vs slow max: {worst}"))
}

fn graphs() -> Outcome {
    let space = create_space("l2", DistType::Float).unwrap();
    let data = uniform(&*space, 10_000, 8, 21, 0.0);
    let mut notes = Vec::new();
    let mut pass = true;
    for (method, params) in [("hnsw", "M=10,efConstruction=200"), ("sw-graph", "NN=10,efConstruction=200")] {
        let mut recalls = Vec::new();
        for seed in [0u64, 1] {
            let mut cfg = bootstrap_cfg("l2", method);
            cfg.test_set_qty = 2;
            cfg.knn = vec![10];
            cfg.create_index = params.into();
            cfg.query_time_params = vec!["efSearch=200".into()];
            cfg.seed = seed;
            match run_on(&cfg, space.clone(), data.clone(), None) {
                Ok(out) => {
                    let r = &out.per_type[0].1[0];
                    recalls.push(r.recall.mean);
                    pass &= r.recall.mean >= 0.95 && r.impr_dist_comp.mean >= 2.0;
                    notes.push(format!(
                        "{method} seed {seed}: recall {:.4} imprDistComp {:.2}",
                        r.recall.mean, r.impr_dist_comp.mean
                    ));
                }
                Err(e) => {
                    pass = false;
                    notes.push(format!("{method}: {e}"));
                }
            }
        }
        if recalls.len() == 2 && (recalls[0] - recalls[1]).abs() > 0.03 {
            pass = false;
            notes.push(format!("{method}: recall spread across seeds exceeds 0.03"));
        }
    }
    outcome(pass, notes.join("; "))
}

fn napp_oracle() -> Outcome {
    let space: SpaceRef = create_space("l2", DistType::Float).unwrap();
    let data = Arc::new(uniform(&*space, 1000, 8, 31, 0.0));
    let queries = uniform(&*space, 100, 8, 32, 0.0);
    let ctx = IndexContext::new(space.clone(), data.clone(), 5);
    let mut p = ParamMap::parse("numPivot=32,numPivotIndex=8").unwrap();
    let mut napp = Napp::build(&ctx, &mut p).unwrap();
    let pivots = napp.pivots().to_vec();
    let sets: Vec<Vec<u32>> = data
        .iter()
        .map(|r| closest_pivots(&pivot_distances(&*space, &pivots, r.view()), 8))
        .collect();
    let mut mismatches = 0;
    let mut total = 0;
    for nps in [1u32, 4, 8] {
        napp.set_query_time_params(&mut ParamMap::parse(&format!("numPivotSearch={nps}")).unwrap())
            .unwrap();
        for q in queries.iter() {
            let qset = closest_pivots(&pivot_distances(&*space, &pivots, q.view()), 8);
            let expected: Vec<(u32, u32)> = sets
                .iter()
                .enumerate()
                .filter_map(|(id, s)| {
                    let shared = s.iter().filter(|p| qset.contains(p)).count() as u32;
                    (shared >= nps).then_some((id as u32, shared))
                })
                .collect();
            let mut query = Query::knn(&*space, q.view(), 10);
            let got = napp.candidates(&mut query);
            total += 1;
            if got != expected {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("{mismatches} of {total} candidate sets differ from the oracle"))
}

/// Random object for a space, chosen by the mnemonic's base name.
fn random_object(space: &dyn Space, base: &str, rng: &mut ChaCha8Rng) -> ObjectRecord {
    match base {
        "leven" | "normleven" => {
            let len = rng.random_range(0..7);
            let s: String = (0..len).map(|_| ['a', 'b', 'c'][rng.random_range(0..3)]).collect();
            space.parse(0, -1, &s).unwrap()
        }
        "bit_hamming" => {
            let s: String = (0..64).map(|_| if rng.random() { '1' } else { '0' }).collect();
            space.parse(0, -1, &s).unwrap()
        }
        b if b.contains("_sparse") => {
            let mut ids: Vec<u32> = (0..20).collect();
            ids.retain(|_| rng.random_bool(0.4));
            if ids.is_empty() {
                ids.push(rng.random_range(0..20));
            }
            let body: Vec<String> = ids.iter().map(|i| format!("{i} {}", rng.random::<f64>() * 2.0 - 0.5)).collect();
            space.parse(0, -1, &body.join(" ")).unwrap()
        }
        b if b.starts_with("sqfd") => {
            let clusters = rng.random_range(1..4);
            let weights = stochastic(rng, clusters);
            let mut v = Vec::with_capacity(clusters * 8);
            for w in weights {
                v.extend((0..7).map(|_| rng.random::<f64>()));
                v.push(w);
            }
            space.from_dense(0, -1, &v).unwrap()
        }
        b if b.starts_with("js") => space.from_dense(0, -1, &stochastic(rng, 8)).unwrap(),
        _ => {
            let v: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
            space.from_dense(0, -1, &v).unwrap()
        }
    }
}

fn mnemonic(base: &str) -> String {
    match base {
        "lp" | "lp_sparse" => format!("{base}:p=3"),
        "sqfd_heuristic_func" | "sqfd_gaussian_func" => format!("{base}:alpha=1"),
        b => b.to_string(),
    }
}

fn triangle_violation(space: &dyn Space, x: &ObjectRecord, y: &ObjectRecord, z: &ObjectRecord) -> bool {
    let (xz, xy, yz) = (
        space.distance(x.view(), z.view()),
        space.distance(x.view(), y.view()),
        space.distance(y.view(), z.view()),
    );
    xz > (xy + yz) * (1.0 + 1e-9) + 1e-12
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut checked = Vec::new();
    let mut broken = Vec::new();
    for base in space_names() {
        let space = create_space(&mnemonic(base), DistType::Double).unwrap();
        if !space.props().metric {
            continue;
        }
        checked.push(base);
        for _ in 0..10_000 {
            let t: Vec<ObjectRecord> = (0..3).map(|_| random_object(&*space, base, &mut rng)).collect();
            if triangle_violation(&*space, &t[0], &t[1], &t[2]) {
                broken.push(base);
                break;
            }
        }
    }
    // Directed search: perturb the middle point of the worst triple found so far.
    let witness = |name: &str, base: &str, rng: &mut ChaCha8Rng| -> Option<usize> {
        let space = create_space(name, DistType::Double).unwrap();
        for trial in 1..=100_000 {
            let x = random_object(&*space, base, rng);
            let z = random_object(&*space, base, rng);
            let y = if base == "lp" {
                let (a, b) = (space.vector(x.view()), space.vector(z.view()));
                match (a, b) {
                    (Some(simsearch_core::space::VectorData::Dense(a)), Some(simsearch_core::space::VectorData::Dense(b))) => {
                        // Corner of the box spanned by x and z: far from the straight line.
                        let c: Vec<f64> = a.iter().zip(&b).enumerate().map(|(i, (p, q))| if i % 2 == 0 { *p } else { *q }).collect();
                        space.from_dense(0, -1, &c).unwrap()
                    }
                    _ => random_object(&*space, base, rng),
                }
            } else {
                random_object(&*space, base, rng)
            };
            if triangle_violation(&*space, &x, &y, &z) {
                return Some(trial);
            }
        }
        None
    };
    let lp = witness("lp:p=0.5", "lp", &mut rng);
    let nl = witness("normleven", "normleven", &mut rng);
    let pass = broken.is_empty() && lp.is_some() && nl.is_some();
    outcome(
        pass,
        format!(
            "{} metric spaces checked, violations in {:?}; lp:p=0.5 witness after {:?} trials, normleven after {:?}",
            checked.len(),
            broken,
            lp,
            nl
        ),
    )
}

fn gold_machinery() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("gs").to_string_lossy().into_owned();
    let space = create_space("l2", DistType::Float).unwrap();
    let data = uniform(&*space, 3000, 8, 51, 0.0);
    let mut cfg = bootstrap_cfg("l2", "vptree");
    cfg.test_set_qty = 2;
    cfg.knn = vec![10];
    cfg.range = vec![0.2];
    cfg.query_time_params = vec!["alphaLeft=2,alphaRight=2".into()];
    cfg.cache_prefix_gs = Some(prefix.clone());
    let mut notes = Vec::new();

    let fresh = run_on(&cfg, space.clone(), data.clone(), None).unwrap();
    let cached = run_on(&cfg, space.clone(), data.clone(), None).unwrap();
    let effectiveness = |o: &simsearch::RunOutput| {
        o.splits
            .iter()
            .flatten()
            .flatten()
            .map(|s| (s.recall.clone(), s.class_accuracy.clone(), s.log_rel_pos_error.clone(), s.num_closer.clone()))
            .collect::<Vec<_>>()
    };
    let identical = !fresh.gold_from_cache
        && cached.gold_from_cache
        && effectiveness(&fresh)
            .iter()
            .flat_map(|t| [&t.0, &t.1, &t.2, &t.3])
            .zip(effectiveness(&cached).iter().flat_map(|t| [&t.0, &t.1, &t.2, &t.3]))
            .all(|(a, b)| a.iter().map(|v| v.to_bits()).eq(b.iter().map(|v| v.to_bits())));
    if !identical {
        notes.push("cached run differs from fresh run".to_string());
    }

    // Exact answers computed under another distance, then reused: results look "too good".
    let bad_prefix = dir.path().join("bad").to_string_lossy().into_owned();
    let mut bad = cfg.clone();
    bad.cache_prefix_gs = Some(bad_prefix);
    let l1 = create_space("l1", DistType::Float).unwrap();
    run_on(&bad, l1, data.clone(), None).unwrap();
    let tripped = matches!(run_on(&bad, space.clone(), data.clone(), None), Err(Error::Sanity(_)));
    if !tripped {
        notes.push("corrupted-distance fixture passed the sanity check".into());
    }

    let mut fewer = cfg.clone();
    fewer.max_num_query = 50;
    let rejected = matches!(run_on(&fewer, space.clone(), data, None), Err(Error::Cache(_)));
    if !rejected {
        notes.push("changed query count did not reject the cache".into());
    }
    let meta_ok = GoldCache::load(&prefix, &cfg.cache_meta(3000)).is_ok();
    let pass = identical && tripped && rejected && meta_ok;
    outcome(
        pass,
        if notes.is_empty() {
            "cache round-trip bit-identical, corrupted fixture fatal, meta mismatch rejected".into()
        } else {
            notes.join("; ")
        },
    )
}

fn persistence() -> Outcome {
    let space: SpaceRef = create_space("l2", DistType::Float).unwrap();
    let data = Arc::new(uniform(&*space, 5000, 8, 61, 0.0));
    let queries = uniform(&*space, 100, 8, 62, 0.0);
    let ctx = IndexContext::new(space.clone(), data, 3);
    let mut notes = Vec::new();
    for (method, params, qtp) in [
        ("hnsw", "M=10,efConstruction=100", "efSearch=50"),
        ("sw-graph", "NN=10,efConstruction=100", "efSearch=50"),
        ("napp", "numPivot=64,numPivotIndex=8", "numPivotSearch=2"),
    ] {
        let mut built = create_index(method, &ctx, &mut ParamMap::parse(params).unwrap()).unwrap();
        let bytes = built.save().unwrap();
        let mut loaded = load_index(&ctx, &bytes).unwrap();
        let qp = ParamMap::parse(qtp).unwrap();
        simsearch_core::index::apply_query_time_params(&mut *built, &qp).unwrap();
        simsearch_core::index::apply_query_time_params(&mut *loaded, &qp).unwrap();
        let differ = queries
            .iter()
            .filter(|q| {
                let run = |i: &dyn Index| {
                    let mut query = Query::knn(&*space, q.view(), 10);
                    i.search(&mut query).unwrap();
                    query.results()
                };
                run(&*built) != run(&*loaded)
            })
            .count();
        notes.push(format!("{method}: {differ} of 100 differ"));
        if differ > 0 {
            return outcome(false, notes.join("; "));
        }
    }
    outcome(true, notes.join("; "))
}

fn tuner() -> Outcome {
    let space = create_space("l2", DistType::Float).unwrap();
    let data = uniform(&*space, 10_000, 8, 71, 0.0);
    let mut cfg = bootstrap_cfg("l2", "vptree");
    cfg.test_set_qty = 1;
    cfg.knn = vec![1];
    cfg.create_index = "tuneK=1,desiredRecall=0.9".into();
    match run_on(&cfg, space, data, None) {
        Ok(out) => {
            let r = out.per_type[0].1[0].recall.mean;
            outcome((0.85..=1.0).contains(&r), format!("held-out recall {r:.3}"))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn lev_oracle(a: &[u8], b: &[u8]) -> usize {
    match (a, b) {
        ([], _) => b.len(),
        (_, []) => a.len(),
        ([x, ra @ ..], [y, rb @ ..]) if x == y => lev_oracle(ra, rb),
        ([_, ra @ ..], [_, rb @ ..]) => 1 + lev_oracle(ra, b).min(lev_oracle(a, rb)).min(lev_oracle(ra, rb)),
    }
}

fn levenshtein() -> Outcome {
    let space = create_space("leven", DistType::Int).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let mut bad = 0;
    for _ in 0..10_000 {
        let mut gen = || -> String {
            let n = rng.random_range(0..=8);
            (0..n).map(|_| ['a', 'b', 'c'][rng.random_range(0..3)]).collect()
        };
        let (s, t) = (gen(), gen());
        let d = space.distance(space.parse(0, -1, &s).unwrap().view(), space.parse(1, -1, &t).unwrap().view());
        if d != lev_oracle(s.as_bytes(), t.as_bytes()) as f64 {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} of 10000 pairs disagree with the recursive oracle"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, f64); 9] = [
        ("exactness of exact methods", exactness, 120.0),
        ("divergence approximations", divergence_accuracy, 30.0),
        ("graph methods", graphs, 180.0),
        ("napp candidate oracle", napp_oracle, 30.0),
        ("metric axioms", metric_axioms, f64::INFINITY),
        ("exact-answer cache and sanity check", gold_machinery, f64::INFINITY),
        ("index persistence", persistence, f64::INFINITY),
        ("vptree auto-tuner", tuner, 180.0),
        ("levenshtein oracle", levenshtein, f64::INFINITY),
    ];
    let mut failed = 0;
    for (name, f, budget) in criteria {
        let t = Instant::now();
        let mut o = f();
        let secs = t.elapsed().as_secs_f64();
        if secs > budget {
            o.pass = false;
            o.detail += &format!("; over the {budget}s budget");
        }
        failed += usize::from(!o.pass);
        println!("[{}] {name} ({secs:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
