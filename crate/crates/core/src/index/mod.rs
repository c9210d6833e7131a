//! Index lifecycle and the method factory.
//!
//! An index is built from an [`IndexContext`] (space, data, seed) plus index-time
//! parameters. During search it may compute distances only through the
//! [`Query`] it is handed, which keeps the distance counter honest.

pub mod bbtree;
pub mod bucket;
pub mod ghtree;
pub mod graph;
pub mod list_clusters;
pub mod mifile;
pub mod mult_index;
pub mod napp;
pub mod omedrank;
pub mod perm;
pub mod perm_incsort_bin;
pub mod ppindex;
pub mod proj_incsort;
pub mod proj_vptree;
pub mod seq_search;
pub mod tuner;
pub mod vptree;

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::object::{DataSet, ObjectRecord};
use crate::params::ParamMap;
use crate::persist;
use crate::query::Query;
use crate::space::SpaceRef;

/// Everything an index needs at build time.
#[derive(Clone)]
pub struct IndexContext {
    pub space: SpaceRef,
    pub data: Arc<DataSet>,
    pub seed: u64,
    /// Externally supplied pivots (already parsed), for methods that accept `pivotFile`.
    pub pivots: Option<Vec<ObjectRecord>>,
}

impl IndexContext {
    pub fn new(space: SpaceRef, data: Arc<DataSet>, seed: u64) -> Self {
        IndexContext {
            space,
            data,
            seed,
            pivots: None,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.seed = seed;
        c
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// A built search structure.
pub trait Index: Send + Sync {
    /// Registered method mnemonic.
    fn method(&self) -> &'static str;

    /// Runs `query`, adding results to it.
    fn search(&self, query: &mut Query<'_>) -> Result<()>;

    /// Resets every query-time parameter to its default, then applies and claims those in `params`.
    fn set_query_time_params(&mut self, params: &mut ParamMap) -> Result<()>;

    /// Serialized form for [`load_index`].
    fn save(&self) -> Result<Vec<u8>> {
        Err(Error::Unsupported(alloc::format!("method '{}' cannot save indices", self.method())))
    }

    /// Approximate heap footprint of the structure, excluding the data set itself.
    fn size_bytes(&self) -> usize {
        0
    }

    /// Query-time parameters selected during construction (for example by auto-tuning).
    fn tuned_params(&self) -> Option<ParamMap> {
        None
    }
}

pub type IndexBox = Box<dyn Index>;

/// Method mnemonics understood by [`create_index`].
pub const METHODS: &[&str] = &[
    "seq_search",
    "vptree",
    "ghtree",
    "list_clusters",
    "bbtree",
    "napp",
    "pp-index",
    "mi-file",
    "perm_incsort_bin",
    "perm_bin_vptree",
    "proj_incsort",
    "proj_vptree",
    "omedrank",
    "sw-graph",
    "hnsw",
    "mult_index",
];

/// Builds `method`; every entry of `params` must be consumed.
pub fn create_index(method: &str, ctx: &IndexContext, params: &mut ParamMap) -> Result<IndexBox> {
    let mut index = build(method, ctx, params)?;
    params.check_unused()?;
    index.set_query_time_params(&mut ParamMap::new())?;
    Ok(index)
}

fn build(method: &str, ctx: &IndexContext, p: &mut ParamMap) -> Result<IndexBox> {
    Ok(match method {
        "seq_search" => Box::new(seq_search::SeqSearch::build(ctx, p)?),
        "vptree" => Box::new(vptree::VpTreeIndex::build(ctx, p)?),
        "ghtree" => Box::new(ghtree::GhTree::build(ctx, p)?),
        "list_clusters" => Box::new(list_clusters::ListClusters::build(ctx, p)?),
        "bbtree" => Box::new(bbtree::BbTree::build(ctx, p)?),
        "napp" => Box::new(napp::Napp::build(ctx, p)?),
        "pp-index" => Box::new(ppindex::PpIndex::build(ctx, p)?),
        "mi-file" => Box::new(mifile::MiFile::build(ctx, p)?),
        "perm_incsort_bin" => Box::new(perm_incsort_bin::PermIncSortBin::build(ctx, p)?),
        "perm_bin_vptree" => Box::new(proj_vptree::ProjVpTree::build_perm_bin(ctx, p)?),
        "proj_incsort" => Box::new(proj_incsort::ProjIncSort::build(ctx, p)?),
        "proj_vptree" => Box::new(proj_vptree::ProjVpTree::build(ctx, p)?),
        "omedrank" => Box::new(omedrank::Omedrank::build(ctx, p)?),
        "sw-graph" => Box::new(graph::swgraph::SwGraph::build(ctx, p)?),
        "hnsw" => Box::new(graph::hnsw::Hnsw::build(ctx, p)?),
        "mult_index" => Box::new(mult_index::MultIndex::build(ctx, p)?),
        _ => return Err(Error::UnknownMethod(method.into())),
    })
}

/// Restores an index written by [`Index::save`] for the same space and data.
pub fn load_index(ctx: &IndexContext, bytes: &[u8]) -> Result<IndexBox> {
    let method = persist::peek_method(bytes)?;
    let mut index: IndexBox = match method.as_str() {
        "napp" => Box::new(napp::Napp::load(ctx, bytes)?),
        "sw-graph" => Box::new(graph::swgraph::SwGraph::load(ctx, bytes)?),
        "hnsw" => Box::new(graph::hnsw::Hnsw::load(ctx, bytes)?),
        m if METHODS.contains(&m) => {
            return Err(Error::Unsupported(alloc::format!("method '{m}' cannot load indices")))
        }
        m => return Err(Error::Format(alloc::format!("unknown method '{m}' in index data"))),
    };
    index.set_query_time_params(&mut ParamMap::new())?;
    Ok(index)
}

/// Applies a query-time parameter string such as `efSearch=100`, rejecting unknown names.
pub fn apply_query_time_params(index: &mut dyn Index, params: &ParamMap) -> Result<()> {
    let mut p = params.fresh();
    index.set_query_time_params(&mut p)?;
    p.check_unused()
}

/// Number of build workers requested by `indexThreadQty` (default: all cores with `std`).
pub(crate) fn thread_qty(p: &mut ParamMap) -> Result<usize> {
    let n: usize = p.optional("indexThreadQty", default_threads())?;
    Ok(n.max(1))
}

#[cfg(feature = "std")]
pub(crate) fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[cfg(not(feature = "std"))]
pub(crate) fn default_threads() -> usize {
    1
}

/// Header fields that tie saved indices to their data set.
pub(crate) fn write_data_stamp(w: &mut persist::Writer, data: &DataSet) {
    w.str(data.space_name());
    w.usize(data.len());
}

pub(crate) fn check_data_stamp(r: &mut persist::Reader<'_>, ctx: &IndexContext) -> Result<()> {
    let space = r.string()?;
    let n = r.usize()?;
    if space != ctx.data.space_name() || n != ctx.data.len() {
        return Err(Error::Format(alloc::format!(
            "index built for space '{space}' with {n} objects, have '{}' with {}",
            ctx.data.space_name(),
            ctx.data.len()
        )));
    }
    Ok(())
}

/// Rejects range queries for kNN-only methods.
pub(crate) fn require_knn(q: &Query<'_>, method: &str) -> Result<usize> {
    match q.kind() {
        crate::query::QueryKind::Knn(k) => Ok(k),
        crate::query::QueryKind::Range(_) => Err(Error::Unsupported(alloc::format!(
            "method '{method}' supports only k-NN search"
        ))),
    }
}

/// `f(0..n)` in order, spread over up to `threads` workers when `std` is available.
pub(crate) fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "std")]
    if threads > 1 && n > 1 {
        let per = n.div_ceil(threads);
        let f = &f;
        return std::thread::scope(|s| {
            let handles: Vec<_> = (0..n)
                .step_by(per)
                .map(|start| s.spawn(move || (start..(start + per).min(n)).map(f).collect::<Vec<T>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("index build worker panicked"))
                .collect()
        });
    }
    let _ = threads;
    (0..n).map(f).collect()
}
