//! Navigable small-world graph built by incremental insertion.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use super::{for_each_ordered, query_seed, search_layer, stream_rng, VisitedPool};
use crate::error::{Error, Result};
use crate::index::{check_data_stamp, require_knn, thread_qty, write_data_stamp, Index, IndexContext};
use crate::math::Neighbor;
use crate::object::{DataSet, IdType};
use crate::params::ParamMap;
use crate::persist::{Reader, Writer};
use crate::query::Query;

const VERSION: u32 = 1;

pub struct SwGraph {
    data: Arc<DataSet>,
    adj: Vec<Vec<IdType>>,
    nn: usize,
    ef_construction: usize,
    init_index_attempts: usize,
    seed: u64,
    pool: VisitedPool,
    ef_search: usize,
    init_search_attempts: usize,
}

/// Merges several ranked lists, keeping the best entry per id.
fn merge_unique(lists: Vec<Vec<Neighbor>>) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = lists.concat();
    all.sort_unstable_by_key(|n| (n.id, n.dist));
    all.dedup_by_key(|n| n.id);
    all.sort_unstable();
    all
}

impl SwGraph {
    /// Index-time: `NN` (10), `efConstruction` (NN), `initIndexAttempts` (2), `indexThreadQty`.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let nn: usize = p.optional("NN", 10usize)?;
        let ef_construction: usize = p.optional("efConstruction", nn)?;
        let init_index_attempts: usize = p.optional("initIndexAttempts", 2usize)?;
        let threads = thread_qty(p)?;
        if nn == 0 || init_index_attempts == 0 {
            return Err(Error::InvalidArgument("NN and initIndexAttempts must be positive".into()));
        }
        let n = ctx.data.len();
        let adj: Vec<spin::Mutex<Vec<IdType>>> = (0..n).map(|_| spin::Mutex::new(Vec::new())).collect();
        let pool = VisitedPool::new(n);
        let space = &*ctx.space;
        let data = &*ctx.data;
        for_each_ordered(n, threads, |i| {
            if i == 0 {
                return;
            }
            let obj = data.view(i);
            let mut rng = stream_rng(ctx.seed, i as u64);
            let found = pool.with(|visited| {
                let lists = (0..init_index_attempts)
                    .map(|_| {
                        visited.reset();
                        let start = rng.random_range(0..i) as IdType;
                        let d0 = space.distance(data.view(start as usize), obj);
                        search_layer(
                            &[Neighbor::new(d0, start)],
                            ef_construction.max(nn),
                            visited,
                            |j| space.distance(data.view(j as usize), obj),
                            |j, buf| buf.extend_from_slice(&adj[j as usize].lock()),
                        )
                    })
                    .collect();
                merge_unique(lists)
            });
            let links: Vec<IdType> = found.iter().take(nn).map(|x| x.id).collect();
            for &j in &links {
                let mut l = adj[j as usize].lock();
                if !l.contains(&(i as IdType)) {
                    l.push(i as IdType);
                }
            }
            let mut own = adj[i].lock();
            for &j in &links {
                if !own.contains(&j) {
                    own.push(j);
                }
            }
        });
        Ok(SwGraph {
            data: ctx.data.clone(),
            adj: adj.into_iter().map(spin::Mutex::into_inner).collect(),
            nn,
            ef_construction,
            init_index_attempts,
            seed: ctx.seed,
            pool,
            ef_search: nn,
            init_search_attempts: 1,
        })
    }

    pub fn adjacency(&self) -> &[Vec<IdType>] {
        &self.adj
    }

    pub fn load(ctx: &IndexContext, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::open(bytes, "sw-graph", VERSION)?;
        check_data_stamp(&mut r, ctx)?;
        let nn = r.usize()?;
        let ef_construction = r.usize()?;
        let init_index_attempts = r.usize()?;
        let seed = r.u64()?;
        let n = ctx.data.len();
        let adj = (0..n).map(|_| r.u32s()).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        if adj.iter().flatten().any(|&j| j as usize >= n) {
            return Err(Error::Format("edge to a missing node".into()));
        }
        Ok(SwGraph {
            data: ctx.data.clone(),
            adj,
            nn,
            ef_construction,
            init_index_attempts,
            seed,
            pool: VisitedPool::new(n),
            ef_search: nn,
            init_search_attempts: 1,
        })
    }
}

impl Index for SwGraph {
    fn method(&self) -> &'static str {
        "sw-graph"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        let k = require_knn(q, self.method())?;
        let n = self.data.len();
        if n == 0 {
            return Ok(());
        }
        let ef = self.ef_search.max(k);
        let mut rng = stream_rng(query_seed(self.seed, q.object().bytes()), 0);
        let data = &*self.data;
        let found = self.pool.with(|visited| {
            let lists = (0..self.init_search_attempts)
                .map(|_| {
                    visited.reset();
                    let start = rng.random_range(0..n) as IdType;
                    let d0 = q.distance_to(data.view(start as usize));
                    search_layer(
                        &[Neighbor::new(d0, start)],
                        ef,
                        visited,
                        |j| q.distance_to(data.view(j as usize)),
                        |j, buf| buf.extend_from_slice(&self.adj[j as usize]),
                    )
                })
                .collect();
            merge_unique(lists)
        });
        for nb in found {
            q.check_and_add(nb.id, nb.distance());
        }
        Ok(())
    }

    /// Query-time: `efSearch` (NN), `initSearchAttempts` (1).
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        self.ef_search = p.optional("efSearch", self.nn)?;
        self.init_search_attempts = p.optional("initSearchAttempts", 1usize)?;
        if self.init_search_attempts == 0 {
            return Err(Error::InvalidArgument("initSearchAttempts must be positive".into()));
        }
        Ok(())
    }

    fn save(&self) -> Result<Vec<u8>> {
        let mut w = Writer::new("sw-graph", VERSION);
        write_data_stamp(&mut w, &self.data);
        w.usize(self.nn);
        w.usize(self.ef_construction);
        w.usize(self.init_index_attempts);
        w.u64(self.seed);
        for l in &self.adj {
            w.u32s(l);
        }
        Ok(w.finish())
    }

    fn size_bytes(&self) -> usize {
        self.adj.iter().map(|l| l.len() * 4 + 24).sum()
    }
}
