//! The benchmark driver: splits, exact answers, index construction, timed query passes
//! and aggregation into reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use simsearch_core::index::{self, Index, IndexBox, IndexContext};
use simsearch_core::query::{Neighbor, Query};
use simsearch_core::{create_space, DataSet, DistType, ObjectRecord, ParamMap, Space, SpaceRef};

use crate::aggregate::{fixed_effect, geometric, mean_of_means, SplitSample};
use crate::error::{Error, Result};
use crate::gold::{compute_gold, GoldCache, GoldList, QueryType, SplitGold};
use crate::io::{load_dataset, read_records};
use crate::metrics::{evaluate, sanity_check};
use crate::report::{write_reports, MethodResult};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub space_type: String,
    pub dist_type: DistType,
    pub data_file: PathBuf,
    /// `0` reads the whole file.
    pub max_num_data: usize,
    pub query_file: Option<PathBuf>,
    pub max_num_query: usize,
    pub test_set_qty: usize,
    pub knn: Vec<usize>,
    pub range: Vec<f64>,
    pub method: String,
    pub create_index: String,
    pub query_time_params: Vec<String>,
    pub thread_test_qty: usize,
    pub cache_prefix_gs: Option<String>,
    pub max_cache_gs_relative_qty: usize,
    pub out_file_prefix: Option<String>,
    pub append_to_res_file: bool,
    pub load_index: Option<PathBuf>,
    pub save_index: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            space_type: String::new(),
            dist_type: DistType::Float,
            data_file: PathBuf::new(),
            max_num_data: 0,
            query_file: None,
            max_num_query: 0,
            test_set_qty: 0,
            knn: Vec::new(),
            range: Vec::new(),
            method: String::new(),
            create_index: String::new(),
            query_time_params: Vec::new(),
            thread_test_qty: 1,
            cache_prefix_gs: None,
            max_cache_gs_relative_qty: 10,
            out_file_prefix: None,
            append_to_res_file: false,
            load_index: None,
            save_index: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn query_types(&self) -> Vec<QueryType> {
        let knn = self.knn.iter().map(|&k| QueryType::Knn(k));
        knn.chain(self.range.iter().map(|&r| QueryType::Range(r))).collect()
    }

    fn bootstrap(&self) -> bool {
        self.query_file.is_none()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.knn.is_empty() && self.range.is_empty() {
            return bad("specify at least one of --knn or --range");
        }
        if self.knn.contains(&0) {
            return bad("k must be at least 1");
        }
        if self.range.iter().any(|r| !(*r >= 0.0)) {
            return bad("range radius must be non-negative");
        }
        if self.method.is_empty() {
            return bad("--method is required");
        }
        if self.bootstrap() {
            if self.max_num_query == 0 {
                return bad("without --queryFile, --maxNumQuery must be positive");
            }
            if self.test_set_qty == 0 {
                return bad("without --queryFile, --testSetQty must be at least 1");
            }
            if self.save_index.is_some() && self.cache_prefix_gs.is_none() {
                return bad("saving indices with bootstrapped test sets requires --cachePrefixGS");
            }
        }
        if self.thread_test_qty == 0 {
            return bad("--threadTestQty must be at least 1");
        }
        Ok(())
    }

    /// Run description stored with cached exact answers; a cache must match it exactly.
    pub fn cache_meta(&self, num_data: usize) -> BTreeMap<String, String> {
        let qts: Vec<String> = self.query_types().iter().map(|q| q.to_string()).collect();
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        [
            ("spaceType", self.space_type.clone()),
            ("distType", self.dist_type.name().to_string()),
            ("dataFile", self.data_file.display().to_string()),
            ("maxNumData", self.max_num_data.to_string()),
            ("numData", num_data.to_string()),
            ("queryFile", path(&self.query_file)),
            ("maxNumQuery", self.max_num_query.to_string()),
            ("testSetQty", self.test_set_qty.to_string()),
            ("queryTypes", qts.join(",")),
            ("maxCacheGSRelativeQty", self.max_cache_gs_relative_qty.to_string()),
            ("seed", self.seed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Query positions of each bootstrap split, sampled without replacement.
pub fn bootstrap_splits(n: usize, test_set_qty: usize, max_num_query: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if max_num_query >= n {
        return Err(Error::Config(format!(
            "maxNumQuery ({max_num_query}) must be smaller than the number of data points ({n})"
        )));
    }
    Ok((0..test_set_qty as u64)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s));
            rand::seq::index::sample(&mut rng, n, max_num_query).into_vec()
        })
        .collect())
}

/// Indexable data and queries of one split.
pub struct Split {
    pub query_ids: Vec<usize>,
    pub data: Arc<DataSet>,
    pub queries: Vec<ObjectRecord>,
}

impl Split {
    /// Queries are the records at `query_ids`; the rest, in file order, are indexed.
    pub fn carve(all: &DataSet, query_ids: Vec<usize>) -> Self {
        let mut is_query = vec![false; all.len()];
        for &i in &query_ids {
            is_query[i] = true;
        }
        let rest: Vec<usize> = (0..all.len()).filter(|&i| !is_query[i]).collect();
        let queries = query_ids.iter().map(|&i| all.get(i).clone()).collect();
        Split {
            query_ids,
            data: Arc::new(all.subset(&rest)),
            queries,
        }
    }
}

/// Results of one timed pass over a query set.
pub struct Pass {
    pub results: Vec<Vec<Neighbor>>,
    pub times_ms: Vec<f64>,
    pub dist_counts: Vec<f64>,
    pub wall_secs: f64,
}

pub fn run_pass(
    index: &dyn Index,
    space: &dyn Space,
    queries: &[ObjectRecord],
    qt: QueryType,
    pool: &rayon::ThreadPool,
) -> Result<Pass> {
    let start = Instant::now();
    let per: Vec<Result<(Vec<Neighbor>, f64, f64)>> = pool.install(|| {
        queries
            .par_iter()
            .map(|q| {
                let t = Instant::now();
                let mut query = Query::new(space, q.view(), qt.into());
                index.search(&mut query)?;
                let ms = t.elapsed().as_secs_f64() * 1e3;
                Ok((query.results(), ms, query.distance_count() as f64))
            })
            .collect()
    });
    let wall_secs = start.elapsed().as_secs_f64();
    let mut pass = Pass {
        results: Vec::with_capacity(per.len()),
        times_ms: Vec::with_capacity(per.len()),
        dist_counts: Vec::with_capacity(per.len()),
        wall_secs,
    };
    for r in per {
        let (res, ms, d) = r?;
        pass.results.push(res);
        pass.times_ms.push(ms);
        pass.dist_counts.push(d);
    }
    Ok(pass)
}

/// Per-split measurements for one query type and query-time parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMetrics {
    pub recall: Vec<f64>,
    pub class_accuracy: Vec<f64>,
    pub log_rel_pos_error: Vec<f64>,
    pub num_closer: Vec<f64>,
    pub time: SplitSample,
    pub dist: SplitSample,
    pub impr_efficiency: f64,
    pub impr_dist_comp: f64,
    pub clamped: bool,
    pub num_points: usize,
    pub memory_mb: f64,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Scores a pass against exact answers and a brute-force baseline pass.
pub fn score_pass(
    pass: &Pass,
    baseline: &Pass,
    gold: &[GoldList],
    qt: QueryType,
    split: &Split,
    memory_bytes: usize,
) -> Result<SplitMetrics> {
    let mut m = SplitMetrics {
        recall: Vec::new(),
        class_accuracy: Vec::new(),
        log_rel_pos_error: Vec::new(),
        num_closer: Vec::new(),
        time: SplitSample::of(&pass.times_ms),
        dist: SplitSample::of(&pass.dist_counts),
        impr_efficiency: baseline.wall_secs / pass.wall_secs.max(f64::MIN_POSITIVE),
        impr_dist_comp: mean(&baseline.dist_counts) / mean(&pass.dist_counts).max(f64::MIN_POSITIVE),
        clamped: false,
        num_points: split.data.len(),
        memory_mb: memory_bytes as f64 / (1024.0 * 1024.0),
    };
    for (i, (res, g)) in pass.results.iter().zip(gold).enumerate() {
        sanity_check(res, g, i)?;
        let e = evaluate(res, g, qt, &split.data, split.queries[i].label());
        m.recall.push(e.recall);
        m.class_accuracy.push(e.class_accuracy);
        m.log_rel_pos_error.push(e.log_rel_pos_error);
        m.num_closer.push(e.num_closer);
        m.clamped |= e.beyond_depth;
    }
    Ok(m)
}

/// Pools split measurements into one report row.
pub fn aggregate(method: &str, index_params: &str, query_params: &str, splits: &[SplitMetrics]) -> MethodResult {
    let means = |f: fn(&SplitMetrics) -> &Vec<f64>| splits.iter().map(|s| mean(f(s))).collect::<Vec<_>>();
    let ratios = |f: fn(&SplitMetrics) -> f64| splits.iter().map(f).collect::<Vec<_>>();
    MethodResult {
        method: method.to_string(),
        index_params: index_params.to_string(),
        query_params: query_params.to_string(),
        num_points: splits.first().map_or(0, |s| s.num_points),
        num_queries: splits.first().map_or(0, |s| s.recall.len()),
        recall: mean_of_means(&means(|s| &s.recall)),
        class_accuracy: mean_of_means(&means(|s| &s.class_accuracy)),
        rel_pos_error: geometric(&means(|s| &s.log_rel_pos_error)),
        num_closer: mean_of_means(&means(|s| &s.num_closer)),
        query_time: fixed_effect(&splits.iter().map(|s| s.time).collect::<Vec<_>>()),
        dist_comp: fixed_effect(&splits.iter().map(|s| s.dist).collect::<Vec<_>>()),
        impr_efficiency: mean_of_means(&ratios(|s| s.impr_efficiency)),
        impr_dist_comp: mean_of_means(&ratios(|s| s.impr_dist_comp)),
        memory_mb: mean(&ratios(|s| s.memory_mb)),
        clamped_positions: splits.iter().any(|s| s.clamped),
    }
}

/// Everything a run produced, per query type in configuration order.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub per_type: Vec<(QueryType, Vec<MethodResult>)>,
    /// Raw split measurements, indexed like `per_type` and then by parameter set.
    pub splits: Vec<Vec<Vec<SplitMetrics>>>,
    /// Whether the exact answers came from the cache.
    pub gold_from_cache: bool,
}

/// Loads the configured files and runs the experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let space = create_space(&cfg.space_type, cfg.dist_type)?;
    info!("reading data from {}", cfg.data_file.display());
    let data = load_dataset(&*space, &cfg.data_file, cfg.max_num_data)?;
    let queries = match &cfg.query_file {
        Some(q) => Some(read_records(&*space, q, cfg.max_num_query)?),
        None => None,
    };
    run_on(cfg, space, data, queries)
}

/// Runs the experiment on already loaded objects; `queries` replaces bootstrapping.
pub fn run_on(
    cfg: &ExperimentConfig,
    space: SpaceRef,
    data: DataSet,
    queries: Option<Vec<ObjectRecord>>,
) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.thread_test_qty)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    let qts = cfg.query_types();
    let meta = cfg.cache_meta(data.len());
    let coef = cfg.max_cache_gs_relative_qty.max(1);

    let cached = match &cfg.cache_prefix_gs {
        Some(prefix) if GoldCache::exists(prefix) => {
            info!("loading exact answers from cache {prefix}");
            Some(GoldCache::load(prefix, &meta)?)
        }
        _ => None,
    };
    let gold_from_cache = cached.is_some();

    let bootstrap = queries.is_none();
    let splits: Vec<Split> = match queries {
        Some(queries) => vec![Split {
            query_ids: Vec::new(),
            data: Arc::new(data),
            queries,
        }],
        None => {
            let ids = match &cached {
                Some(c) => c.splits.iter().map(|s| s.query_ids.clone()).collect(),
                None => bootstrap_splits(data.len(), cfg.test_set_qty, cfg.max_num_query, cfg.seed)?,
            };
            ids.into_iter().map(|q| Split::carve(&data, q)).collect()
        }
    };

    let gold: Vec<SplitGold> = match cached {
        Some(c) => {
            check_cache_shape(&c, &splits, qts.len())?;
            c.splits
        }
        None => {
            let t = Instant::now();
            let g: Vec<SplitGold> = splits
                .iter()
                .map(|s| SplitGold {
                    query_ids: s.query_ids.clone(),
                    per_type: qts
                        .iter()
                        .map(|&qt| compute_gold(&*space, &s.data, &s.queries, qt, coef, &pool))
                        .collect(),
                })
                .collect();
            info!("exact answers computed in {:.2}s", t.elapsed().as_secs_f64());
            if let Some(prefix) = &cfg.cache_prefix_gs {
                GoldCache {
                    meta: meta.clone(),
                    splits: g.clone(),
                }
                .save(prefix)?;
                info!("exact answers cached under {prefix}");
            }
            g
        }
    };

    let param_sets: Vec<String> = if cfg.query_time_params.is_empty() {
        vec![String::new()]
    } else {
        cfg.query_time_params.clone()
    };
    let parsed: Vec<ParamMap> = param_sets.iter().map(|s| ParamMap::parse(s)).collect::<simsearch_core::Result<_>>()?;

    // [query type][param set][split]
    let mut measured: Vec<Vec<Vec<SplitMetrics>>> = vec![vec![Vec::new(); param_sets.len()]; qts.len()];
    for (si, split) in splits.iter().enumerate() {
        let ctx = context(cfg, &space, split, si)?;
        let mut index = obtain_index(cfg, &ctx, si, bootstrap)?;
        if let Some(t) = index.tuned_params() {
            info!("tuned query-time parameters: {}", describe(&t));
        }
        let memory = split.data.size_bytes() + index.size_bytes();
        let baseline = index::create_index("seq_search", &ctx, &mut ParamMap::new())?;
        for (ti, &qt) in qts.iter().enumerate() {
            run_pass(&*baseline, &*space, &split.queries, qt, &pool)?;
            let base = run_pass(&*baseline, &*space, &split.queries, qt, &pool)?;
            for (pi, p) in parsed.iter().enumerate() {
                index::apply_query_time_params(&mut *index, p)?;
                run_pass(&*index, &*space, &split.queries, qt, &pool)?;
                let pass = run_pass(&*index, &*space, &split.queries, qt, &pool)?;
                let m = score_pass(&pass, &base, &gold[si].per_type[ti], qt, split, memory)?;
                info!(
                    "split {si} {qt} [{}]: recall {:.4}, {:.1} distances per query",
                    param_sets[pi],
                    mean(&m.recall),
                    m.dist.mean
                );
                measured[ti][pi].push(m);
            }
        }
    }

    let mut per_type = Vec::new();
    for (ti, &qt) in qts.iter().enumerate() {
        let rows: Vec<MethodResult> = param_sets
            .iter()
            .enumerate()
            .map(|(pi, qp)| aggregate(&cfg.method, &cfg.create_index, qp, &measured[ti][pi]))
            .collect();
        if let Some(prefix) = &cfg.out_file_prefix {
            write_reports(prefix, qt, &rows, cfg.append_to_res_file)?;
        }
        per_type.push((qt, rows));
    }
    Ok(RunOutput {
        per_type,
        splits: measured,
        gold_from_cache,
    })
}

fn check_cache_shape(c: &GoldCache, splits: &[Split], num_types: usize) -> Result<()> {
    let ok = c.splits.len() == splits.len()
        && c.splits.iter().zip(splits).all(|(g, s)| {
            g.per_type.len() == num_types && g.per_type.iter().all(|t| t.len() == s.queries.len())
        });
    if ok {
        Ok(())
    } else {
        Err(Error::Cache("cached exact answers do not match the query sets of this run".into()))
    }
}

fn describe(p: &ParamMap) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

fn context(cfg: &ExperimentConfig, space: &SpaceRef, split: &Split, si: usize) -> Result<IndexContext> {
    let mut ctx = IndexContext::new(space.clone(), split.data.clone(), cfg.seed.wrapping_add(si as u64));
    let params = ParamMap::parse(&cfg.create_index)?;
    if let Some(path) = params.peek("pivotFile") {
        ctx.pivots = Some(read_records(&**space, Path::new(path), 0)?);
    }
    Ok(ctx)
}

fn split_path(base: &Path, si: usize, bootstrap: bool) -> PathBuf {
    if bootstrap {
        PathBuf::from(format!("{}_split{si}", base.display()))
    } else {
        base.to_path_buf()
    }
}

/// Loads the split's saved index when available, otherwise builds it (and saves it if asked).
fn obtain_index(cfg: &ExperimentConfig, ctx: &IndexContext, si: usize, bootstrap: bool) -> Result<IndexBox> {
    if let Some(base) = &cfg.load_index {
        let path = split_path(base, si, bootstrap);
        if path.exists() {
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let index = index::load_index(ctx, &bytes)?;
            info!("loaded index from {}", path.display());
            return Ok(index);
        }
        warn!("no saved index at {}, building a new one", path.display());
    }
    let t = Instant::now();
    let mut params = ParamMap::parse(&cfg.create_index)?;
    let index = index::create_index(&cfg.method, ctx, &mut params)?;
    info!("built {} in {:.2}s", cfg.method, t.elapsed().as_secs_f64());
    if let Some(base) = &cfg.save_index {
        let path = split_path(base, si, bootstrap);
        if path.exists() {
            warn!("{} already exists and is left untouched", path.display());
        } else {
            let bytes = index.save()?;
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            info!("saved index to {}", path.display());
        }
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_are_reproducible_and_disjoint() {
        let a = bootstrap_splits(1000, 5, 100, 7).unwrap();
        assert_eq!(a, bootstrap_splits(1000, 5, 100, 7).unwrap());
        assert_eq!(a.len(), 5);
        let space = create_space("l2", DistType::Float).unwrap();
        let data = DataSet::from_records("l2", (0..1000).map(|i| space.from_dense(0, -1, &[i as f64]).unwrap()));
        for ids in a {
            let mut u = ids.clone();
            u.sort_unstable();
            u.dedup();
            assert_eq!(u.len(), 100);
            let s = Split::carve(&data, ids);
            assert_eq!(s.data.len(), 900);
            assert!(s.queries.iter().all(|q| s.data.iter().all(|r| r.bytes() != q.bytes())));
        }
        assert!(bootstrap_splits(100, 1, 100, 0).is_err());
    }

    #[test]
    fn config_checks() {
        let mut c = ExperimentConfig {
            method: "seq_search".into(),
            knn: vec![1],
            max_num_query: 10,
            test_set_qty: 1,
            ..Default::default()
        };
        assert!(c.validate().is_ok());
        c.save_index = Some("x".into());
        assert!(c.validate().is_err());
        c.cache_prefix_gs = Some("g".into());
        assert!(c.validate().is_ok());
        c.test_set_qty = 0;
        assert!(c.validate().is_err());
        c.query_file = Some("q".into());
        assert!(c.validate().is_ok());
        c.knn.clear();
        assert!(c.validate().is_err());
    }
}
