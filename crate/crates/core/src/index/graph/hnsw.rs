//! Hierarchical navigable small-world graph.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use super::{for_each_ordered, search_layer, VisitedPool};
use crate::error::{Error, Result};
use crate::index::{check_data_stamp, require_knn, thread_qty, write_data_stamp, Index, IndexContext};
use crate::math::{self, Neighbor};
use crate::object::{DataSet, IdType};
use crate::params::ParamMap;
use crate::persist::{Reader, Writer};
use crate::query::Query;
use crate::space::Space;

const VERSION: u32 = 1;

/// `floor(-ln(U) * mult)` with `U` uniform on `(0, 1]`.
pub fn sample_level(mult: f64, rng: &mut impl Rng) -> usize {
    let u = 1.0 - rng.random::<f64>();
    math::floor(-math::ln(u) * mult) as usize
}

/// Neighbour selection for a node `base`.
///
/// `cands` must be ascending by distance to `base`; `dist(a, b)` is the distance between two
/// candidates. Type 0 keeps the `m` closest. Type 1 keeps a candidate only when it is closer to
/// `base` than to every candidate kept so far, then tops up from the rejects.
pub fn select_neighbors(
    cands: &[Neighbor],
    m: usize,
    delaunay_type: u32,
    mut dist: impl FnMut(IdType, IdType) -> f64,
) -> Vec<Neighbor> {
    if delaunay_type == 0 || cands.len() <= m {
        return cands.iter().take(m).copied().collect();
    }
    let mut kept: Vec<Neighbor> = Vec::with_capacity(m);
    let mut rejected = Vec::new();
    for &c in cands {
        if kept.len() == m {
            break;
        }
        if kept.iter().all(|s| c.distance() < dist(s.id, c.id)) {
            kept.push(c);
        } else {
            rejected.push(c);
        }
    }
    for r in rejected {
        if kept.len() == m {
            break;
        }
        kept.push(r);
    }
    kept.sort_unstable();
    kept
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Params {
    m: usize,
    max_m: usize,
    max_m0: usize,
    ef_construction: usize,
    mult: f64,
    delaunay_type: u32,
}

pub struct Hnsw {
    data: Arc<DataSet>,
    params: Params,
    seed: u64,
    /// `links[node][level]`.
    links: Vec<Vec<Vec<IdType>>>,
    entry: IdType,
    top: usize,
    pool: VisitedPool,
    ef_search: usize,
}

struct Builder<'a> {
    space: &'a dyn Space,
    data: &'a DataSet,
    params: Params,
    links: Vec<spin::Mutex<Vec<Vec<IdType>>>>,
    /// (entry point, its level); `None` until the first insertion.
    entry: spin::Mutex<Option<(IdType, usize)>>,
    pool: VisitedPool,
}

impl Builder<'_> {
    fn d(&self, a: IdType, b: IdType) -> f64 {
        self.space.distance(self.data.view(a as usize), self.data.view(b as usize))
    }

    fn copy_links(&self, node: IdType, level: usize, buf: &mut Vec<IdType>) {
        if let Some(l) = self.links[node as usize].lock().get(level) {
            buf.extend_from_slice(l);
        }
    }

    fn insert(&self, i: IdType, level: usize) {
        let (ep, top) = {
            let mut e = self.entry.lock();
            match *e {
                None => {
                    *e = Some((i, level));
                    return;
                }
                Some(v) => v,
            }
        };
        let dist_to = |j: IdType| self.d(j, i);
        let mut eps = alloc::vec![Neighbor::new(dist_to(ep), ep)];
        self.pool.with(|visited| {
            for l in (level + 1..=top).rev() {
                visited.reset();
                eps = search_layer(&eps, 1, visited, dist_to, |j, b| self.copy_links(j, l, b));
            }
            for l in (0..=level.min(top)).rev() {
                visited.reset();
                let mut found = search_layer(&eps, self.params.ef_construction, visited, dist_to, |j, b| {
                    self.copy_links(j, l, b)
                });
                // Other workers may already have linked back to `i`, making it reachable from itself.
                found.retain(|n| n.id != i);
                if found.is_empty() {
                    continue;
                }
                let chosen = select_neighbors(&found, self.params.m, self.params.delaunay_type, |a, b| self.d(a, b));
                let cap = if l == 0 { self.params.max_m0 } else { self.params.max_m };
                for c in &chosen {
                    self.link_back(i, c.id, l, cap);
                }
                for c in &chosen {
                    self.link_back(c.id, i, l, cap);
                }
                eps = found;
            }
        });
        let mut e = self.entry.lock();
        if let Some((_, t)) = *e {
            if level > t {
                *e = Some((i, level));
            }
        }
    }

    /// Adds `i` to `node`'s list at `level`, shrinking it to `cap` if needed.
    fn link_back(&self, node: IdType, i: IdType, level: usize, cap: usize) {
        let mut guard = self.links[node as usize].lock();
        let list = &mut guard[level];
        if list.contains(&i) {
            return;
        }
        list.push(i);
        if list.len() <= cap {
            return;
        }
        let mut cands: Vec<Neighbor> = list.iter().map(|&j| Neighbor::new(self.d(j, node), j)).collect();
        cands.sort_unstable();
        let kept = select_neighbors(&cands, cap, self.params.delaunay_type, |a, b| self.d(a, b));
        *list = kept.into_iter().map(|n| n.id).collect();
    }
}

impl Hnsw {
    /// Index-time: `M` (16), `maxM` (M), `maxM0` (2M), `efConstruction` (200), `mult` (1/ln M),
    /// `delaunay_type` (1), `skip_optimized_index` (accepted, no effect), `indexThreadQty`.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let m: usize = p.optional("M", 16usize)?;
        if m < 2 {
            return Err(Error::InvalidArgument("M must be at least 2".into()));
        }
        let params = Params {
            m,
            max_m: p.optional("maxM", m)?,
            max_m0: p.optional("maxM0", 2 * m)?,
            ef_construction: p.optional("efConstruction", 200usize)?,
            mult: p.optional("mult", 1.0 / math::ln(m as f64))?,
            delaunay_type: p.optional("delaunay_type", 1u32)?,
        };
        let _: bool = p.optional("skip_optimized_index", false)?;
        let threads = thread_qty(p)?;
        if params.delaunay_type > 1 {
            return Err(Error::InvalidArgument("delaunay_type must be 0 or 1".into()));
        }
        if !(params.mult > 0.0) {
            return Err(Error::InvalidArgument("mult must be positive".into()));
        }
        if params.max_m < params.m || params.max_m0 < params.m {
            return Err(Error::InvalidArgument("maxM and maxM0 must be at least M".into()));
        }
        let n = ctx.data.len();
        let mut rng = ctx.rng();
        let levels: Vec<usize> = (0..n).map(|_| sample_level(params.mult, &mut rng)).collect();
        let b = Builder {
            space: &*ctx.space,
            data: &ctx.data,
            params,
            links: levels.iter().map(|&l| spin::Mutex::new(alloc::vec![Vec::new(); l + 1])).collect(),
            entry: spin::Mutex::new(None),
            pool: VisitedPool::new(n),
        };
        // The first node must be in place before workers start looking for entry points.
        if n > 0 {
            b.insert(0, levels[0]);
        }
        for_each_ordered(n.saturating_sub(1), threads, |i| b.insert(i as IdType + 1, levels[i + 1]));
        let (entry, top) = b.entry.into_inner().unwrap_or((0, 0));
        Ok(Hnsw {
            data: ctx.data.clone(),
            params,
            seed: ctx.seed,
            links: b.links.into_iter().map(spin::Mutex::into_inner).collect(),
            entry,
            top,
            pool: b.pool,
            ef_search: 10,
        })
    }

    /// Sampled level of each node.
    pub fn node_level(&self, i: usize) -> usize {
        self.links[i].len() - 1
    }

    pub fn links(&self, i: usize, level: usize) -> &[IdType] {
        &self.links[i][level]
    }

    pub fn entry_point(&self) -> (IdType, usize) {
        (self.entry, self.top)
    }

    /// Degree caps `(maxM, maxM0)`.
    pub fn caps(&self) -> (usize, usize) {
        (self.params.max_m, self.params.max_m0)
    }

    pub fn load(ctx: &IndexContext, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::open(bytes, "hnsw", VERSION)?;
        check_data_stamp(&mut r, ctx)?;
        let params = Params {
            m: r.usize()?,
            max_m: r.usize()?,
            max_m0: r.usize()?,
            ef_construction: r.usize()?,
            mult: r.f64()?,
            delaunay_type: r.u32()?,
        };
        let seed = r.u64()?;
        let entry = r.u32()?;
        let top = r.usize()?;
        let n = ctx.data.len();
        let mut links = Vec::with_capacity(n);
        for _ in 0..n {
            let levels = r.len(8)?;
            if levels == 0 {
                return Err(Error::Format("node without a ground layer".into()));
            }
            links.push((0..levels).map(|_| r.u32s()).collect::<Result<Vec<_>>>()?);
        }
        r.finish()?;
        let bad_edge = links.iter().any(|node: &Vec<Vec<u32>>| {
            node.iter()
                .enumerate()
                .any(|(l, adj)| adj.iter().any(|&j| j as usize >= n || links[j as usize].len() <= l))
        });
        if bad_edge || (n > 0 && (entry as usize >= n || links[entry as usize].len() != top + 1)) {
            return Err(Error::Format("inconsistent hnsw graph".into()));
        }
        Ok(Hnsw {
            data: ctx.data.clone(),
            params,
            seed,
            links,
            entry,
            top,
            pool: VisitedPool::new(n),
            ef_search: 10,
        })
    }
}

impl Index for Hnsw {
    fn method(&self) -> &'static str {
        "hnsw"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        let k = require_knn(q, self.method())?;
        if self.data.is_empty() {
            return Ok(());
        }
        let data = &*self.data;
        let d0 = q.distance_to(data.view(self.entry as usize));
        let mut eps = alloc::vec![Neighbor::new(d0, self.entry)];
        let found = self.pool.with(|visited| {
            for l in (1..=self.top).rev() {
                visited.reset();
                eps = search_layer(&eps, 1, visited, |j| q.distance_to(data.view(j as usize)), |j, b| {
                    b.extend_from_slice(&self.links[j as usize][l])
                });
            }
            visited.reset();
            search_layer(&eps, self.ef_search.max(k), visited, |j| q.distance_to(data.view(j as usize)), |j, b| {
                b.extend_from_slice(&self.links[j as usize][0])
            })
        });
        for nb in found {
            q.check_and_add(nb.id, nb.distance());
        }
        Ok(())
    }

    /// Query-time: `efSearch` (10).
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        self.ef_search = p.optional("efSearch", 10usize)?;
        Ok(())
    }

    fn save(&self) -> Result<Vec<u8>> {
        let mut w = Writer::new("hnsw", VERSION);
        write_data_stamp(&mut w, &self.data);
        let p = &self.params;
        w.usize(p.m);
        w.usize(p.max_m);
        w.usize(p.max_m0);
        w.usize(p.ef_construction);
        w.f64(p.mult);
        w.u32(p.delaunay_type);
        w.u64(self.seed);
        w.u32(self.entry);
        w.usize(self.top);
        for node in &self.links {
            w.usize(node.len());
            for l in node {
                w.u32s(l);
            }
        }
        Ok(w.finish())
    }

    fn size_bytes(&self) -> usize {
        self.links.iter().flatten().map(|l| l.len() * 4 + 24).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn level_distribution() {
        let mult = 1.0 / math::ln(16.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 1_000_000;
        let levels: Vec<usize> = (0..n).map(|_| sample_level(mult, &mut rng)).collect();
        // floor of an exponential with mean `mult`: P(L >= 1) = e^{-1/mult}.
        let p1 = levels.iter().filter(|&&l| l >= 1).count() as f64 / n as f64;
        let want = (-1.0 / mult).exp();
        assert!((p1 - want).abs() < 0.002, "{p1} vs {want}");
        let mean = levels.iter().sum::<usize>() as f64 / n as f64;
        // E[floor(X)] = 1 / (e^{1/mult} - 1) for X ~ Exp(mean mult).
        let want_mean = 1.0 / ((1.0 / mult).exp() - 1.0);
        assert!((mean - want_mean).abs() < 0.02 * want_mean);
    }

    #[test]
    fn heuristic_blocks_shadowed_points() {
        // Base at 0; candidates at 1 and 2 on a line: 2 is closer to 1 than to the base.
        let pos = [0.0f64, 1.0, 2.0, -1.5];
        let d = |a: IdType, b: IdType| (pos[a as usize] - pos[b as usize]).abs();
        let mut cands: Vec<Neighbor> = [1u32, 2, 3].iter().map(|&i| Neighbor::new(d(i, 0), i)).collect();
        cands.sort_unstable();
        let kept = select_neighbors(&cands, 2, 1, d);
        let ids: Vec<IdType> = kept.iter().map(|n| n.id).collect();
        assert_eq!(ids, [1, 3]);
        // Relaxed fill: with room for three, the shadowed point returns.
        assert_eq!(select_neighbors(&cands, 3, 1, d).len(), 3);
        assert_eq!(select_neighbors(&cands[..2], 2, 1, d).len(), 2);
        let closest: Vec<IdType> = select_neighbors(&cands, 2, 0, d).iter().map(|n| n.id).collect();
        assert_eq!(closest, [1, 3]);
    }
}
