//! Permutation prefix index: objects ordered by their closest-pivot sequences.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::bucket::refine;
use crate::index::perm::{closest_pivots, pivot_distances, query_pivot_distances, select_pivots};
use crate::index::{parallel_map, thread_qty, Index, IndexContext};
use crate::object::{DataSet, IdType, ObjectRecord, PackedObjects};
use crate::params::ParamMap;
use crate::query::Query;

pub struct PpIndex {
    data: Arc<DataSet>,
    pivots: Vec<ObjectRecord>,
    /// Stored depth: the full closest-pivot sequence.
    depth: usize,
    /// Object ids in lexicographic order of their pivot sequences.
    order: Vec<IdType>,
    /// `depth` pivot indices per entry of `order`.
    keys: Vec<u32>,
    packed: Option<PackedObjects>,
    prefix_len: usize,
    min_candidate: usize,
}

impl PpIndex {
    /// Index-time: `numPivot` (32), `chunkBucket` (1), `indexThreadQty`.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let num_pivot: usize = p.optional("numPivot", 32usize)?;
        let chunk: bool = p.optional("chunkBucket", true)?;
        let threads = thread_qty(p)?;
        if num_pivot == 0 {
            return Err(Error::InvalidArgument("numPivot must be positive".into()));
        }
        let mut rng = ctx.rng();
        let pivots = select_pivots(ctx, num_pivot, &mut rng)?;
        let space = &*ctx.space;
        let prefixes: Vec<Vec<u32>> = parallel_map(ctx.data.len(), threads, |i| {
            closest_pivots(&pivot_distances(space, &pivots, ctx.data.view(i)), num_pivot)
        });
        let mut order: Vec<IdType> = (0..ctx.data.len() as IdType).collect();
        order.sort_by(|&a, &b| prefixes[a as usize].cmp(&prefixes[b as usize]).then(a.cmp(&b)));
        let keys = order.iter().flat_map(|&i| prefixes[i as usize].iter().copied()).collect();
        let packed = chunk.then(|| PackedObjects::pack(order.iter().map(|&i| ctx.data.view(i as usize))));
        Ok(PpIndex {
            data: ctx.data.clone(),
            pivots,
            depth: num_pivot,
            order,
            keys,
            packed,
            prefix_len: default_prefix(num_pivot),
            min_candidate: 100,
        })
    }

    fn key(&self, i: usize) -> &[u32] {
        &self.keys[i * self.depth..(i + 1) * self.depth]
    }

    /// Entry range whose stored prefix starts with `prefix`.
    pub fn prefix_range(&self, prefix: &[u32]) -> core::ops::Range<usize> {
        let l = prefix.len();
        let n = self.order.len();
        let lo = partition(n, |i| &self.key(i)[..l] < prefix);
        let hi = partition(n, |i| &self.key(i)[..l] <= prefix);
        lo..hi
    }

    /// Candidate entry range for a query, shortening the prefix until enough candidates exist.
    pub fn candidate_range(&self, q: &mut Query<'_>) -> core::ops::Range<usize> {
        let qp = closest_pivots(&query_pivot_distances(q, &self.pivots), self.depth);
        let mut l = self.prefix_len;
        loop {
            let r = self.prefix_range(&qp[..l]);
            if r.len() >= self.min_candidate || l == 0 {
                return r;
            }
            l -= 1;
        }
    }

    pub fn ids_in(&self, r: core::ops::Range<usize>) -> &[IdType] {
        &self.order[r]
    }
}

fn default_prefix(num_pivot: usize) -> usize {
    num_pivot.min(4)
}

fn partition(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

impl Index for PpIndex {
    fn method(&self) -> &'static str {
        "pp-index"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        let r = self.candidate_range(q);
        match &self.packed {
            Some(p) => {
                for i in r {
                    let v = p.get(i);
                    let d = q.distance_to(v);
                    q.check_and_add(v.id, d);
                }
            }
            None => refine(&self.data, self.order[r].iter().copied(), q),
        }
        Ok(())
    }

    /// Query-time: `prefixLength` (min(4, numPivot)), `minCandidate` (100).
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        let prefix_len: usize = p.optional("prefixLength", default_prefix(self.depth))?;
        if prefix_len == 0 || prefix_len > self.depth {
            return Err(Error::InvalidArgument("need 1 <= prefixLength <= numPivot".into()));
        }
        self.prefix_len = prefix_len;
        self.min_candidate = p.optional("minCandidate", 100usize)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.order.len() * 4 + self.keys.len() * 4 + self.packed.as_ref().map_or(0, PackedObjects::size_bytes)
    }
}
