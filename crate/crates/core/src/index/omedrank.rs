//! Rank aggregation over per-coordinate sorted lists of projections.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::bucket::refine;
use crate::index::proj_incsort::{project_all, read_projection};
use crate::index::{thread_qty, Index, IndexContext};
use crate::math::{abs, scan_count};
use crate::object::{DataSet, IdType};
use crate::params::ParamMap;
use crate::projection::Projection;
use crate::query::Query;

/// One coordinate's objects, ascending by value (ties by id).
struct SortedList {
    coords: Vec<f64>,
    ids: Vec<IdType>,
}

struct Chunk {
    start: usize,
    len: usize,
    lists: Vec<SortedList>,
}

pub struct Omedrank {
    data: Arc<DataSet>,
    proj: Projection,
    chunks: Vec<Chunk>,
    num_pivot_search: usize,
    min_freq: f64,
    db_scan_frac: f64,
}

impl Omedrank {
    /// Index-time: `projType`, `numPivot` (projection dimension), `intermDim` (0),
    /// `chunkIndexSize` (65536), `indexThreadQty`.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let proj = read_projection(ctx, p, "numPivot")?;
        let chunk_size: usize = p.optional("chunkIndexSize", 65536usize)?;
        let threads = thread_qty(p)?;
        if chunk_size == 0 {
            return Err(Error::InvalidArgument("chunkIndexSize must be positive".into()));
        }
        let coords = project_all(ctx, &proj, threads)?;
        let n = ctx.data.len();
        let chunks = (0..n)
            .step_by(chunk_size)
            .map(|start| {
                let len = chunk_size.min(n - start);
                let lists = (0..proj.dim())
                    .map(|d| {
                        let mut ids: Vec<IdType> = (start as IdType..(start + len) as IdType).collect();
                        ids.sort_by(|&a, &b| coords[a as usize][d].total_cmp(&coords[b as usize][d]).then(a.cmp(&b)));
                        SortedList {
                            coords: ids.iter().map(|&i| coords[i as usize][d]).collect(),
                            ids,
                        }
                    })
                    .collect();
                Chunk { start, len, lists }
            })
            .collect();
        Ok(Omedrank {
            data: ctx.data.clone(),
            num_pivot_search: proj.dim(),
            proj,
            chunks,
            min_freq: 0.5,
            db_scan_frac: 0.05,
        })
    }

    pub fn chunk_count(&self) -> usize {
        self.chunks.len()
    }

    /// Candidates in the order their counters reach the threshold, chunk by chunk.
    pub fn candidates(&self, q: &mut Query<'_>) -> Result<Vec<IdType>> {
        let pq = self.proj.project_query(q)?;
        let mut dims: Vec<usize> = (0..pq.len()).collect();
        dims.sort_by(|&a, &b| abs(pq[a]).total_cmp(&abs(pq[b])).then(a.cmp(&b)));
        dims.truncate(self.num_pivot_search);
        let threshold = self.num_pivot_search as f64 * self.min_freq;
        let mut out = Vec::new();
        let mut counters = Vec::new();
        for chunk in &self.chunks {
            let quota = scan_count(self.db_scan_frac, chunk.len);
            counters.clear();
            counters.resize(chunk.len, 0u32);
            let mut found = 0;
            let mut bump = |id: IdType, out: &mut Vec<IdType>, found: &mut usize| {
                let c = &mut counters[id as usize - chunk.start];
                *c += 1;
                if f64::from(*c) >= threshold && f64::from(*c - 1) < threshold {
                    out.push(id);
                    *found += 1;
                }
            };
            // (low, high) window per selected list.
            let mut windows: Vec<(usize, usize)> = Vec::with_capacity(dims.len());
            for &d in &dims {
                let list = &chunk.lists[d];
                let pos = nearest(&list.coords, pq[d]);
                windows.push((pos, pos));
                if found < quota {
                    bump(list.ids[pos], &mut out, &mut found);
                }
            }
            while found < quota {
                let mut moved = false;
                for (w, &d) in windows.iter_mut().zip(&dims) {
                    let list = &chunk.lists[d];
                    if w.1 + 1 < list.ids.len() && found < quota {
                        w.1 += 1;
                        moved = true;
                        bump(list.ids[w.1], &mut out, &mut found);
                    }
                    if w.0 > 0 && found < quota {
                        w.0 -= 1;
                        moved = true;
                        bump(list.ids[w.0], &mut out, &mut found);
                    }
                }
                if !moved {
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// Index of the value closest to `x` in ascending `v`; ties go to the lower index.
fn nearest(v: &[f64], x: f64) -> usize {
    let pos = v.partition_point(|&c| c < x);
    if pos == v.len() {
        return pos - 1;
    }
    if pos > 0 && abs(x - v[pos - 1]) <= abs(v[pos] - x) {
        pos - 1
    } else {
        pos
    }
}

impl Index for Omedrank {
    fn method(&self) -> &'static str {
        "omedrank"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        let c = self.candidates(q)?;
        refine(&self.data, c, q);
        Ok(())
    }

    /// Query-time: `numPivotSearch` (numPivot), `minFreq` (0.5), `dbScanFrac` (0.05).
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        let nps: usize = p.optional("numPivotSearch", self.proj.dim())?;
        if nps == 0 || nps > self.proj.dim() {
            return Err(Error::InvalidArgument("need 1 <= numPivotSearch <= numPivot".into()));
        }
        let min_freq: f64 = p.optional("minFreq", 0.5)?;
        if !(min_freq > 0.0 && min_freq <= 1.0) {
            return Err(Error::InvalidArgument("minFreq must lie in (0, 1]".into()));
        }
        self.num_pivot_search = nps;
        self.min_freq = min_freq;
        self.db_scan_frac = p.optional("dbScanFrac", 0.05)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.chunks.iter().flat_map(|c| &c.lists).map(|l| l.ids.len() * 12).sum::<usize>() + self.proj.size_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::nearest;

    #[test]
    fn nearest_value() {
        let v = [1.0, 2.0, 4.0];
        assert_eq!(nearest(&v, 0.0), 0);
        assert_eq!(nearest(&v, 1.6), 1);
        assert_eq!(nearest(&v, 3.0), 1);
        assert_eq!(nearest(&v, 3.1), 2);
        assert_eq!(nearest(&v, 9.0), 2);
        assert_eq!(nearest(&[5.0], -1.0), 0);
    }
}
