//! Metric inverted file over pivot positions.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::bucket::refine;
use crate::index::perm::{closest_pivots, permutation, pivot_distances, query_pivot_distances, select_pivots};
use crate::index::{parallel_map, thread_qty, Index, IndexContext};
use crate::math::scan_count;
use crate::object::{DataSet, IdType, ObjectRecord};
use crate::params::ParamMap;
use crate::query::Query;

pub struct MiFile {
    data: Arc<DataSet>,
    pivots: Vec<ObjectRecord>,
    num_pivot_index: usize,
    /// Per pivot: `(position, id)` sorted by position, then id.
    lists: Vec<Vec<(u32, IdType)>>,
    num_pivot_search: usize,
    max_pos_diff: usize,
    db_scan_frac: f64,
}

impl MiFile {
    /// Index-time: `numPivot` (128), `numPivotIndex` (min(16, numPivot)), `indexThreadQty`.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let num_pivot: usize = p.optional("numPivot", 128usize)?;
        let num_pivot_index: usize = p.optional("numPivotIndex", num_pivot.min(16))?;
        let threads = thread_qty(p)?;
        if num_pivot_index == 0 || num_pivot_index > num_pivot {
            return Err(Error::InvalidArgument("need 1 <= numPivotIndex <= numPivot".into()));
        }
        let mut rng = ctx.rng();
        let pivots = select_pivots(ctx, num_pivot, &mut rng)?;
        let space = &*ctx.space;
        let perms: Vec<Vec<u32>> =
            parallel_map(ctx.data.len(), threads, |i| permutation(&pivot_distances(space, &pivots, ctx.data.view(i))));
        let mut lists = alloc::vec![Vec::new(); num_pivot];
        for (id, perm) in perms.iter().enumerate() {
            for (pivot, &pos) in perm.iter().enumerate() {
                if pos as usize <= num_pivot_index {
                    lists[pivot].push((pos, id as IdType));
                }
            }
        }
        for l in &mut lists {
            l.sort_unstable();
        }
        Ok(MiFile {
            data: ctx.data.clone(),
            pivots,
            num_pivot_index,
            lists,
            num_pivot_search: num_pivot_index,
            max_pos_diff: num_pivot,
            db_scan_frac: 0.05,
        })
    }

    /// Penalty charged for a selected pivot absent from an object's indexed prefix.
    fn penalty(&self) -> u64 {
        self.num_pivot_index as u64 + 1
    }

    /// Candidate ids with their L1 position estimates, in no particular order.
    ///
    /// An object's estimate starts at the full penalty for every selected pivot the
    /// first time it is met; each posting found replaces one penalty with the actual
    /// position difference.
    pub fn estimates(&self, q: &mut Query<'_>) -> Vec<(u64, IdType)> {
        let dists = query_pivot_distances(q, &self.pivots);
        let qperm = permutation(&dists);
        let selected = closest_pivots(&dists, self.num_pivot_search);
        let base = self.penalty() * self.num_pivot_search as u64;
        let mut est = alloc::vec![u64::MAX; self.data.len()];
        let mut seen = Vec::new();
        for &pivot in &selected {
            let qpos = qperm[pivot as usize] as i64;
            let lo = (qpos - self.max_pos_diff as i64).max(0) as u32;
            let hi = (qpos + self.max_pos_diff as i64).min(u32::MAX as i64) as u32;
            let list = &self.lists[pivot as usize];
            let start = list.partition_point(|e| e.0 < lo);
            for &(pos, id) in list[start..].iter().take_while(|e| e.0 <= hi) {
                let e = &mut est[id as usize];
                if *e == u64::MAX {
                    *e = base;
                    seen.push(id);
                }
                *e = *e - self.penalty() + (qpos - pos as i64).unsigned_abs();
            }
        }
        seen.into_iter().map(|id| (est[id as usize], id)).collect()
    }

    /// Ids with the smallest estimates, at most `⌈dbScanFrac·N⌉` of them.
    pub fn candidates(&self, q: &mut Query<'_>) -> Vec<IdType> {
        let mut est = self.estimates(q);
        let m = scan_count(self.db_scan_frac, self.data.len()).min(est.len());
        if m < est.len() {
            est.select_nth_unstable(m);
            est.truncate(m);
        }
        est.into_iter().map(|e| e.1).collect()
    }
}

impl Index for MiFile {
    fn method(&self) -> &'static str {
        "mi-file"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        let c = self.candidates(q);
        refine(&self.data, c, q);
        Ok(())
    }

    /// Query-time: `numPivotSearch` (numPivotIndex), `maxPosDiff` (numPivot), `dbScanFrac` (0.05).
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        let nps: usize = p.optional("numPivotSearch", self.num_pivot_index)?;
        if nps == 0 || nps > self.num_pivot_index {
            return Err(Error::InvalidArgument("need 1 <= numPivotSearch <= numPivotIndex".into()));
        }
        self.num_pivot_search = nps;
        self.max_pos_diff = p.optional("maxPosDiff", self.pivots.len())?;
        self.db_scan_frac = p.optional("dbScanFrac", 0.05)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.lists.iter().map(|l| l.len() * 8).sum::<usize>()
            + self.pivots.iter().map(ObjectRecord::byte_len).sum::<usize>()
    }
}
